#pragma once

#include <string>

namespace httplib {
class Server;
}

namespace urbansense {

class NetworkServer;

/// Registers every /api/v1 route on `http`. `server` must outlive it.
void mount_api(httplib::Server &http, NetworkServer &server);

} // namespace urbansense
