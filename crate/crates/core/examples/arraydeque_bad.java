class BadQueue {
    int drainOne() {
        ArrayDeque q = new ArrayDeque();
        q.addLast(3);
        q.clear();
        return q.removeFirst();
    }
}
