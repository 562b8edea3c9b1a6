class ClosingClient {
    void run(SocketAddress addr) {
        Socket s = new Socket();
        s.bind(addr);
        s.close();
        s.close();
    }
}
