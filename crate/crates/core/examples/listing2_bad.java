class CheckedRange {
    @Refinement("_ >= a && _ <= b")
    public static int inRange(int a, @Refinement("b > a") int b) {
        return a + 1;
    }

    static void use() {
        inRange(10, 20); // correct
        inRange(10, 2);
    }
}
