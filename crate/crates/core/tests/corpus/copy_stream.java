public static long copy(InputStream in, OutputStream out) throws IOException {
    byte[] buffer = new byte[8192];
    long total = 0;
    int read = in.read(buffer);
    while (read != -1) {
        out.write(buffer, 0, read);
        total += read;
        read = in.read(buffer);
    }
    return total;
}
