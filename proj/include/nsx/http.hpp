// Copyright 2026 The NSX Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <string_view>

#include "httplib.h"
#include "nsx/error.hpp"

namespace nsx {

/// An http(s) URL split into the part httplib connects to and the path.
struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // begins with '/' or is empty

  /// `path` when set, otherwise `fallback`.
  std::string path_or(std::string_view fallback) const {
    return path.empty() || path == "/" ? std::string(fallback) : path;
  }
};

inline Endpoint parse_endpoint(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos)
    throw InvalidArgument("endpoint must be an http(s) URL: " + std::string(url));
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https")
    throw InvalidArgument("unsupported URL scheme: " + std::string(url));
  const auto host_start = scheme_end + 3;
  const auto path_start = url.find('/', host_start);
  Endpoint ep;
  ep.origin = std::string(url.substr(0, path_start));
  if (ep.origin.size() == host_start)
    throw InvalidArgument("endpoint has no host: " + std::string(url));
  if (path_start != std::string_view::npos)
    ep.path = std::string(url.substr(path_start));
  return ep;
}

inline std::unique_ptr<httplib::Client> make_client(
    const Endpoint& ep, std::chrono::milliseconds timeout) {
  auto client = std::make_unique<httplib::Client>(ep.origin);
  const auto sec = timeout.count() / 1000;
  const auto usec = (timeout.count() % 1000) * 1000;
  client->set_connection_timeout(sec, usec);
  client->set_read_timeout(sec, usec);
  client->set_write_timeout(sec, usec);
  return client;
}

inline bool is_timeout(httplib::Error e) {
  return e == httplib::Error::Read || e == httplib::Error::ConnectionTimeout ||
         e == httplib::Error::Write;
}

}  // namespace nsx
