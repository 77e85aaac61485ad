// URL parser modelled on the observable behaviour of java.net.URL: the
// reference and query are split off first, then the scheme, authority and path.

#include "grammine/subjects.hpp"

namespace grammine::subjects {

namespace {

constexpr std::size_t npos = std::string::npos;

std::size_t index_of(Tracer& t, const TracedString& s, char c, std::size_t from = 0,
                     std::size_t limit = npos) {
  limit = std::min(limit, s.size());
  for (std::size_t i = from; i < limit; ++i)
    if (t.is(s.at(i), c)) return i;
  return npos;
}

std::size_t last_index_of(Tracer& t, const TracedString& s, char c) {
  for (std::size_t i = s.size(); i-- > 0;)
    if (t.is(s.at(i), c)) return i;
  return npos;
}

void require_visible(Tracer& t, const TracedString& s, const char* what) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = t.look(s.at(i));
    if (c < 0x21 || c > 0x7e) throw ParseError(std::string("illegal character in ") + what);
  }
}

bool is_valid_protocol(Tracer& t, const TracedString& protocol) {
  Tracer::Call call(t, "isValidProtocol");
  call.param(0, "protocol", protocol);
  static constexpr std::string_view kKnown[] = {"http"};
  for (auto known : kKnown) {
    if (protocol.size() != known.size()) continue;
    bool same = true;
    for (std::size_t i = 0; i < known.size() && same; ++i) same = t.is(protocol.at(i), known[i]);
    if (same) return true;
  }
  return false;
}

void parse_port(Tracer& t, const TracedString& port) {
  Tracer::Call call(t, "parsePort");
  call.param(0, "port", port);
  if (port.empty()) throw ParseError("empty port");
  for (std::size_t i = 0; i < port.size(); ++i) {
    char c = t.look(port.at(i));
    if (c < '0' || c > '9') throw ParseError("invalid port number");
  }
  call.returns(port);
}

void parse_authority(Tracer& t, const TracedString& authority) {
  Tracer::Call call(t, "parseAuthority");
  call.param(0, "authority", authority);
  if (authority.empty()) throw ParseError("missing host");
  std::size_t at = last_index_of(t, authority, '@');
  std::size_t host_begin = 0;
  if (at != npos) {
    auto user_info = authority.substr(0, at);
    if (user_info.empty()) throw ParseError("empty user info");
    require_visible(t, user_info, "user info");
    t.field_store("userInfo", user_info);
    host_begin = at + 1;
  }
  std::size_t colon = index_of(t, authority, ':', host_begin);
  auto host = authority.substr(host_begin, colon == npos ? npos : colon - host_begin);
  if (host.empty()) throw ParseError("missing host");
  for (std::size_t i = 0; i < host.size(); ++i) {
    char c = t.look(host.at(i));
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
              c == '.' || c == '-';
    if (!ok) throw ParseError("invalid host");
  }
  t.field_store("host", host);
  if (colon != npos) {
    auto port = authority.substr(colon + 1);
    parse_port(t, port);
    t.field_store("port", port);
  }
}

void parse_string(Tracer& t, const TracedString& spec) {
  Tracer::Call call(t, "parseString");
  call.param(0, "string", spec);
  std::size_t colon = index_of(t, spec, ':');
  if (colon == npos || colon == 0) throw ParseError("no protocol");
  auto protocol = spec.substr(0, colon);
  if (!is_valid_protocol(t, protocol)) throw ParseError("unknown protocol");
  t.field_store("protocol", protocol);
  if (colon + 2 >= spec.size() || !t.is(spec.at(colon + 1), '/') || !t.is(spec.at(colon + 2), '/'))
    throw ParseError("expected //");
  std::size_t start = colon + 3;
  std::size_t slash = index_of(t, spec, '/', start);
  auto authority = spec.substr(start, slash == npos ? npos : slash - start);
  parse_authority(t, authority);
  if (slash != npos) {
    auto path = spec.substr(slash);
    require_visible(t, path, "path");
    t.field_store("path", path);
  }
}

}  // namespace

void url(Tracer& t) {
  Tracer::Call call(t, "URL");
  const TracedString& spec = t.input();
  call.param(0, "spec", spec);
  std::size_t limit = index_of(t, spec, '#');
  if (limit != npos) {
    auto ref = spec.substr(limit + 1);
    require_visible(t, ref, "reference");
    t.field_store("ref", ref);
  } else {
    limit = spec.size();
  }
  std::size_t query_at = index_of(t, spec, '?', 0, limit);
  std::size_t end = limit;
  if (query_at != npos) {
    auto query = spec.substr(query_at + 1, limit - query_at - 1);
    require_visible(t, query, "query");
    t.field_store("query", query);
    end = query_at;
  }
  parse_string(t, spec.substr(0, end));
}

}  // namespace grammine::subjects
