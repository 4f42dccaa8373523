public static long trace(long[][] matrix) {
    long sum = 0L;
    int size = Math.min(matrix.length, matrix[0].length);
    for (int i = 0; i < size; i++) {
        sum += matrix[i][i];
    }
    return sum;
}
