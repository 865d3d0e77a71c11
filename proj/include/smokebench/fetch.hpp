#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "smokebench/core.hpp"

namespace smokebench {

struct FetchOutcome {
  Date date{};
  std::filesystem::path path;
  std::uintmax_t bytes = 0;
  bool ok = false;
  bool skipped = false;  // destination already existed
  std::string error;     // set when !ok
};

// {model} and {date} placeholders; both must appear.
std::string expand_url_template(const std::string& url_template, const ModelId& model, Date date);

// One GET per date; destination file "{model}_{date}" in dest_dir. Existing
// files are skipped unless force. Bodies stream to a .part file renamed on
// success, so failures leave nothing behind. Redirects are followed to depth
// 5; a per-date failure is recorded and the run continues.
std::vector<FetchOutcome> fetch_archives(const std::string& url_template, const ModelId& model,
                                         Date start, Date end,
                                         const std::filesystem::path& dest_dir, bool force,
                                         int timeout_secs);

}  // namespace smokebench
