class Queue {
    int drainOne() {
        ArrayDeque q = new ArrayDeque();
        q.addLast(3);
        q.addLast(4);
        int head = q.getFirst();
        return q.removeFirst() + head;
    }
}
