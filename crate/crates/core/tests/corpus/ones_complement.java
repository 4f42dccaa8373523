int checksum(byte[] data) {
    int sum = 0;
    for (int i = 0; i < data.length; i++) {
        sum += data[i] & 0xff;
        if ((sum & 0x10000) != 0) {
            sum = (sum & 0xffff) + 1;
        }
    }
    return ~sum & 0xffff;
}
