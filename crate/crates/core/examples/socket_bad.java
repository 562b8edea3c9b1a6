class BadSocketClient {
    void run(SocketAddress addr) {
        Socket s = new Socket();
        s.connect(addr, 1000);
        s.close();
    }
}
