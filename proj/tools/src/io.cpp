// Copyright 2026 The mchain Authors
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

#include "io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "mchain/error.hpp"

namespace mchain::cli {

namespace fs = std::filesystem;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const fs::path& path, std::initializer_list<std::string_view> header)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path), columns_(header.size()) {
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
    for (auto h : header) cell(h);
    end_row();
}

void CsvWriter::sep() {
    if (filled_ == columns_) throw Error("too many cells in a row of " + path_.filename().string());
    if (filled_ > 0) line_ += ',';
    ++filled_;
}

CsvWriter& CsvWriter::cell(double v) {
    sep();
    line_ += format_double(v);
    return *this;
}

CsvWriter& CsvWriter::cell(long long v) {
    sep();
    line_ += std::to_string(v);
    return *this;
}

CsvWriter& CsvWriter::cell(std::string_view v) {
    sep();
    if (v.find_first_of(",\"\n") == std::string_view::npos) {
        line_ += v;
    } else {
        line_ += '"';
        for (char c : v) {
            if (c == '"') line_ += '"';
            line_ += c;
        }
        line_ += '"';
    }
    return *this;
}

void CsvWriter::end_row() {
    if (filled_ != columns_) throw Error("incomplete row in " + path_.filename().string());
    line_ += '\n';
    out_ << line_;
    line_.clear();
    filled_ = 0;
}

void CsvWriter::close() {
    out_.close();
    if (!out_) throw Error("failed writing " + path_.string());
}

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

void write_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out << content;
        out.close();
        if (!out) throw Error("failed writing " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string dump_flat_json(const nlohmann::ordered_json& doc) {
    std::string out = "{\n";
    bool first = true;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += "  " + nlohmann::json(it.key()).dump() + ": ";
        const auto& v = it.value();
        if (v.is_number_float()) {
            const double d = v.get<double>();
            out += std::isfinite(d) ? format_double(d) : "null";
        } else {
            out += v.dump();
        }
    }
    out += "\n}\n";
    return out;
}

OutputSet::OutputSet(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

OutputSet::~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& n : names_) fs::remove(dir_ / n, ec);
}

fs::path OutputSet::add(const std::string& name) {
    names_.push_back(name);
    return dir_ / name;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

}  // namespace mchain::cli
