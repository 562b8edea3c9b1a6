class Color {
    static void paint() {
        @Refinement("r >= 0 && r <= 255")
        int r;
        r = 90; // okay
        r = 200 + 60;
    }
}
