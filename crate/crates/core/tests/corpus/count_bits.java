public int bitCount(long value) {
    int count = 0;
    long v = value;
    while (v != 0) {
        v &= v - 1;
        count++;
    }
    return count;
}
