#include <filesystem>
#include <fstream>
#include <regex>
#include <unistd.h>


#include "ember/csv.hpp"
#include "ember/ingest.hpp"

#include <httplib.h>
#undef HZ  // <asm/param.h> macro collides with EventType::HZ

namespace ember {
namespace {

struct UrlParts {
  std::string scheme_host_port;
  std::string path;
};

UrlParts split_url(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/?#]+)([^#]*)?)", std::regex::icase);
  std::smatch m;
  if (!std::regex_search(url, m, re))
    throw Error(Errc::invalid_argument, "unsupported URL '" + url + "' (http or https only)");
  UrlParts parts{m[1].str(), m[2].str()};
  if (parts.path.empty()) parts.path = "/";
  return parts;
}

std::uint64_t write_body(const std::string& body, const std::filesystem::path& dest) {
  csv::write_file_atomic(dest, body);
  return body.size();
}

template <class Request>
std::uint64_t perform(const std::string& url, const std::filesystem::path& dest, const NetworkPolicy& policy,
                      Request&& request) {
  if (!policy.allow)
    throw Error(Errc::network_disabled, "network access disabled; pass --allow-network to fetch " + url);
  const auto parts = split_url(url);
  httplib::Client client(parts.scheme_host_port);
  client.set_follow_location(true);
  client.set_connection_timeout(policy.timeout_seconds, 0);
  client.set_read_timeout(policy.timeout_seconds, 0);
  httplib::Result res = request(client, parts.path);
  if (!res)
    throw Error(Errc::io, "request to " + url + " failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw Error(Errc::http_status, "HTTP " + std::to_string(res->status) + " from " + url, res->status);
  return write_body(res->body, dest);
}

}  // namespace

std::uint64_t fetch_url_to_file(const std::string& url, const std::filesystem::path& dest,
                                const NetworkPolicy& policy) {
  return perform(url, dest, policy,
                 [](httplib::Client& c, const std::string& path) { return c.Get(path); });
}

std::uint64_t fetch_overpass(const std::string& endpoint, const std::string& query,
                             const std::filesystem::path& dest, const NetworkPolicy& policy) {
  return perform(endpoint, dest, policy, [&](httplib::Client& c, const std::string& path) {
    httplib::Params params{{"data", query}};
    return c.Post(path, params);
  });
}

}  // namespace ember
