public int countNonEmptyLines(String text) {
    int count = 0;
    String[] lines = text.split("\n");
    for (String line : lines) {
        if (line.trim().length() > 0) {
            count = count + 1;
        }
    }
    return count;
}
