public void removeNegatives(List<Integer> numbers) {
    Iterator<Integer> it = numbers.iterator();
    while (it.hasNext()) {
        Integer n = it.next();
        if (n < 0) {
            it.remove();
        }
    }
}
