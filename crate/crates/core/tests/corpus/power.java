public static double power(double base, int exponent) {
    double result = 1.0;
    int e = exponent < 0 ? -exponent : exponent;
    double b = base;
    while (e > 0) {
        if ((e & 1) == 1) {
            result = result * b;
        }
        b = b * b;
        e >>= 1;
    }
    if (exponent < 0) {
        result = 1.0 / result;
    }
    return result;
}
