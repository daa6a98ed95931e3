#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "weave/errors.hpp"

namespace weave {

using Json = nlohmann::json;

struct LineError {
    std::size_t line_no = 0; // 1-based
    std::string message;
};

struct JsonlReadResult {
    std::vector<Json> records;
    std::vector<LineError> errors;
};

// Line-delimited JSON. Lenient mode collects malformed lines as per-line
// errors; strict mode throws ParseError on the first one. Blank lines are
// skipped in both modes.
JsonlReadResult read_jsonl(const std::string& path, bool strict = false);

void write_jsonl(const std::string& path, const std::vector<Json>& records);

// Throws SchemaError naming the missing key and line context.
void require_keys(const Json& obj, const std::vector<std::string>& keys,
                  const std::string& context);

// Advisory writer lock: creates `path + ".lock"` exclusively, removes it on
// destruction. A live lock file means another writer owns the path.
class FileLock {
public:
    explicit FileLock(const std::string& path);
    ~FileLock();
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    std::string lock_path_;
};

} // namespace weave
