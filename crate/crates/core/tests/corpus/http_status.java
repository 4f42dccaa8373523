public String describeStatus(int code) {
    String family;
    int hundreds = code / 100;
    switch (hundreds) {
        case 1:
            family = "informational";
            break;
        case 2:
            family = "success";
            break;
        case 3:
            family = "redirection";
            break;
        case 4:
            family = "client error";
            break;
        case 5:
            family = "server error";
            break;
        default:
            family = "unknown";
    }
    StringBuilder sb = new StringBuilder();
    sb.append(code).append(' ').append(family);
    if (code == 404) {
        sb.append(" (not found)");
    }
    return sb.toString();
}
