#include "weave/jsonl.hpp"

#include <cerrno>
#include <cstdio>
#include <fstream>

#include <fcntl.h>
#include <unistd.h>

namespace weave {

JsonlReadResult read_jsonl(const std::string& path, bool strict) {
    std::ifstream in(path);
    if (!in) throw IoError("read_jsonl: cannot open " + path);
    JsonlReadResult out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        Json rec = Json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (rec.is_discarded() || !rec.is_object()) {
            std::string msg = rec.is_discarded() ? "invalid JSON"
                                                 : "record is not an object";
            if (strict) {
                throw ParseError("read_jsonl: " + path + ":" +
                                 std::to_string(line_no) + ": " + msg);
            }
            out.errors.push_back({line_no, msg});
            continue;
        }
        out.records.push_back(std::move(rec));
    }
    return out;
}

void write_jsonl(const std::string& path, const std::vector<Json>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_jsonl: cannot open " + path);
    for (const Json& rec : records) out << rec.dump() << '\n';
    if (!out) throw IoError("write_jsonl: write failed for " + path);
}

void require_keys(const Json& obj, const std::vector<std::string>& keys,
                  const std::string& context) {
    for (const std::string& key : keys) {
        if (!obj.contains(key)) {
            throw SchemaError(context + ": missing key '" + key + "'");
        }
    }
}

FileLock::FileLock(const std::string& path) : lock_path_(path + ".lock") {
    int fd = ::open(lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
        if (errno == EEXIST) {
            throw IoError("another writer holds " + lock_path_);
        }
        throw IoError("cannot create lock file " + lock_path_);
    }
    ::close(fd);
}

FileLock::~FileLock() { std::remove(lock_path_.c_str()); }

} // namespace weave
