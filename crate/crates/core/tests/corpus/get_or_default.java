public V getOrDefault(K key, V defaultValue) {
    V value = map.get(key);
    if (value == null && !map.containsKey(key)) {
        value = defaultValue;
    }
    return value;
}
