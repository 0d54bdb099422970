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

#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mchain::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Shortest round-trip-safe form is not used on purpose: every value is printed
// with 17 significant digits so tables are stable across platforms.
std::string format_double(double v);

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header);

    CsvWriter& cell(double v);
    CsvWriter& cell(long long v);
    CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
    CsvWriter& cell(std::string_view v);
    void end_row();
    void close();

private:
    void sep();

    std::ofstream out_;
    std::filesystem::path path_;
    std::size_t columns_;
    std::size_t filled_ = 0;
    std::string line_;
};

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// Write-to-temporary-then-rename so readers never see a partial file.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// Flat JSON in insertion order with 17-digit doubles; non-finite values become null.
std::string dump_flat_json(const nlohmann::ordered_json& doc);

// Files produced by one command. Removes them again unless committed.
class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir);
    ~OutputSet();

    const std::filesystem::path& dir() const noexcept { return dir_; }
    std::filesystem::path add(const std::string& name);
    const std::vector<std::string>& names() const noexcept { return names_; }
    void commit() noexcept { committed_ = true; }

private:
    std::filesystem::path dir_;
    std::vector<std::string> names_;
    bool committed_ = false;
};

std::string utc_now();

}  // namespace mchain::cli
