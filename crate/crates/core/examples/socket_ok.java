class SocketClient {
    void run(SocketAddress addr) {
        Socket s = new Socket();
        s.bind(addr);
        s.connect(addr, 1000);
        s.sendUrgentData(90);
        s.close();
    }
}
