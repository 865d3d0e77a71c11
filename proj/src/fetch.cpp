// Redirect depth cap required by the fetch contract; normally injected by the
// build so every httplib user agrees, with a fallback for standalone compiles.
#ifndef CPPHTTPLIB_REDIRECT_MAX_COUNT
#define CPPHTTPLIB_REDIRECT_MAX_COUNT 5
#endif
#if defined(SMOKEBENCH_WITH_TLS) && !defined(CPPHTTPLIB_OPENSSL_SUPPORT)
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include "smokebench/fetch.hpp"

#include <fstream>

namespace smokebench {

namespace {

void replace_all(std::string& text, const std::string& what, const std::string& with) {
  std::size_t pos = 0;
  while ((pos = text.find(what, pos)) != std::string::npos) {
    text.replace(pos, what.size(), with);
    pos += with.size();
  }
}

// scheme://host[:port] and the path+query remainder.
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("fetch: bad url '" + url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::string expand_url_template(const std::string& url_template, const ModelId& model, Date date) {
  if (url_template.find("{model}") == std::string::npos ||
      url_template.find("{date}") == std::string::npos) {
    throw ConfigError("fetch: url_template must contain {model} and {date}");
  }
  std::string url = url_template;
  replace_all(url, "{model}", model);
  replace_all(url, "{date}", format_date(date));
  return url;
}

std::vector<FetchOutcome> fetch_archives(const std::string& url_template, const ModelId& model,
                                         Date start, Date end,
                                         const std::filesystem::path& dest_dir, bool force,
                                         int timeout_secs) {
  std::filesystem::create_directories(dest_dir);
  std::vector<FetchOutcome> outcomes;
  for (Date d = start; d <= end; d += std::chrono::days{1}) {
    FetchOutcome outcome;
    outcome.date = d;
    outcome.path = dest_dir / (model + "_" + format_date(d));
    if (!force && std::filesystem::exists(outcome.path)) {
      outcome.ok = true;
      outcome.skipped = true;
      outcomes.push_back(std::move(outcome));
      continue;
    }
    const std::string url = expand_url_template(url_template, model, d);
    const auto [base, path] = split_url(url);
#ifndef SMOKEBENCH_WITH_TLS
    if (base.rfind("https://", 0) == 0) {
      outcome.error = "https unsupported in this build";
      outcomes.push_back(std::move(outcome));
      continue;
    }
#endif
    httplib::Client client(base);
    client.set_follow_location(true);
    client.set_connection_timeout(timeout_secs, 0);
    client.set_read_timeout(timeout_secs, 0);

    const std::filesystem::path partial = outcome.path.string() + ".part";
    {
      std::ofstream out(partial, std::ios::binary);
      if (!out) {
        outcome.error = "cannot write " + partial.string();
        outcomes.push_back(std::move(outcome));
        continue;
      }
      auto res = client.Get(path, [&](const char* data, std::size_t len) {
        out.write(data, std::streamsize(len));
        outcome.bytes += len;
        return bool(out);
      });
      out.close();
      if (!res) {
        outcome.error = httplib::to_string(res.error());
      } else if (res->status < 200 || res->status >= 300) {
        outcome.error = "http status " + std::to_string(res->status);
      }
    }
    if (outcome.error.empty()) {
      std::error_code ec;
      std::filesystem::rename(partial, outcome.path, ec);
      if (ec) {
        outcome.error = "rename failed: " + ec.message();
        std::filesystem::remove(partial);
      } else {
        outcome.ok = true;
      }
    } else {
      outcome.bytes = 0;
      std::filesystem::remove(partial);
    }
    outcomes.push_back(std::move(outcome));
  }
  return outcomes;
}

}  // namespace smokebench
