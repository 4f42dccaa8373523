double scaled(double factor) {
    double x;
    x = 1.0;
    return x * factor;
}
