public String reverse(String input) {
    if (input == null) {
        return null;
    }
    StringBuilder sb = new StringBuilder(input.length());
    for (int i = input.length() - 1; i >= 0; i--) {
        sb.append(input.charAt(i));
    }
    return sb.toString();
}
