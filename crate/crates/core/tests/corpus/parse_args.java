public Map<String, String> parseArgs(String[] args) {
    Map<String, String> options = new LinkedHashMap<>();
    String pendingKey = null;
    for (int i = 0; i < args.length; i++) {
        String arg = args[i];
        if (arg.startsWith("--")) {
            if (pendingKey != null) {
                options.put(pendingKey, "true");
            }
            int eq = arg.indexOf('=');
            if (eq > 2) {
                options.put(arg.substring(2, eq), arg.substring(eq + 1));
                pendingKey = null;
            } else {
                pendingKey = arg.substring(2);
            }
        } else if (pendingKey != null) {
            options.put(pendingKey, arg);
            pendingKey = null;
        } else {
            positional.add(arg);
        }
    }
    if (pendingKey != null) {
        options.put(pendingKey, "true");
    }
    return options;
}
