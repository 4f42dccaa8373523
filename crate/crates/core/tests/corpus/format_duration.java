public static String formatDuration(long totalSeconds) {
    long hours = totalSeconds / 3600;
    long minutes = (totalSeconds % 3600) / 60;
    long seconds = totalSeconds % 60;
    StringBuilder sb = new StringBuilder();
    if (hours > 0) {
        sb.append(hours).append("h ");
    }
    if (minutes > 0 || hours > 0) {
        sb.append(minutes).append("m ");
    }
    sb.append(seconds).append("s");
    return sb.toString();
}
