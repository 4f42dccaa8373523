public Properties loadConfig(String path) {
    Properties props = new Properties();
    File file = new File(path);
    if (!file.exists()) {
        logger.info("config " + path + " not found, using defaults");
        props.setProperty("threads", "4");
        props.setProperty("timeout", "30");
        return props;
    }
    try (InputStream in = new FileInputStream(file)) {
        props.load(in);
    } catch (IOException e) {
        logger.error("failed to read " + path, e);
        throw new IllegalStateException(e);
    }
    String threads = props.getProperty("threads", "4");
    int parsed = Integer.parseInt(threads);
    if (parsed <= 0) {
        props.setProperty("threads", "1");
    }
    return props;
}
