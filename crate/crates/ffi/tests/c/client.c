#include <stdio.h>
#include <string.h>

#include "refjava.h"

static const char *SOCKET =
    "@ExternalRefinementsFor(\"java.net.Socket\")\n"
    "@StateSet({\"unconnected\", \"bound\", \"connected\", \"closed\"})\n"
    "public interface SocketRefinements {\n"
    "    @StateRefinement(to=\"unconnected(this)\")\n"
    "    public void Socket();\n"
    "    @StateRefinement(from=\"unconnected(this)\", to=\"bound(this)\")\n"
    "    public void bind(SocketAddress add);\n"
    "    @StateRefinement(from=\"bound(this)\", to=\"connected(this)\")\n"
    "    public void connect(SocketAddress add, int timeout);\n"
    "    @StateRefinement(to=\"closed(this)\")\n"
    "    public void close();\n"
    "}\n";

static const char *CLIENT =
    "class Client {\n"
    "    void run(SocketAddress a) {\n"
    "        Socket s = new Socket();\n"
    "        s.connect(a, 10);\n"
    "    }\n"
    "}\n";

int main(void) {
    RjSession *s = rj_session_new();
    if (rj_session_add_source(s, "socket.java", SOCKET) != RJ_STATUS_OK) return 10;
    if (rj_session_add_source(s, "client.java", CLIENT) != RJ_STATUS_OK) return 11;
    if (rj_session_add_source(s, "client.java", CLIENT) != RJ_STATUS_DUPLICATE_PATH) return 12;
    RjReport *r = NULL;
    if (rj_session_check(s, &r) != RJ_STATUS_OK) return 13;
    if (rj_report_len(r) != 1) return 14;
    RjKind kind;
    RjPosition pos;
    if (rj_report_get(r, 0, &kind, &pos) != RJ_STATUS_OK) return 15;
    if (kind != RJ_KIND_PROTOCOL || pos.line != 4 || pos.column != 9) return 16;
    printf("%s", rj_report_text(r));
    rj_report_free(r);
    rj_session_set_flags(s, RJ_FLAG_NO_PROTOCOL);
    if (rj_session_check(s, &r) != RJ_STATUS_OK || rj_report_len(r) != 0) return 17;
    rj_report_free(r);
    rj_session_free(s);
    printf("%s\n", rj_status_message(RJ_STATUS_OK));
    return 0;
}
