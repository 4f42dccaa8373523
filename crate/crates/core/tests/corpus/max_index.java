public int indexOfMax(double[] data) {
    int best = -1;
    double bestValue = Double.NEGATIVE_INFINITY;
    for (int i = 0; i < data.length; i++) {
        if (data[i] > bestValue) {
            bestValue = data[i];
            best = i;
        }
    }
    return best;
}
