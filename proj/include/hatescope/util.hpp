#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hatescope {

inline constexpr std::string_view kPipelineVersion = "0.1.0";

/// Selects the OpenMP kernel or its serial reference for record-parallel operations.
enum class Exec { serial, parallel };

/// Raised for malformed input files.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Hashing
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

constexpr std::uint64_t fnv1a(std::string_view s, std::uint64_t h = kFnvOffset) {
    for (unsigned char c : s) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

std::string hex64(std::uint64_t v);

// ---------------------------------------------------------------------------
// Random numbers
// ---------------------------------------------------------------------------

/// mt19937_64 with portable derived draws. std::uniform_*_distribution output is
/// library-specific; everything that feeds a determinism contract goes through here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Strings
// ---------------------------------------------------------------------------

std::string trim(std::string_view s);
std::string ascii_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
/// trim + ASCII case-fold + collapse internal whitespace runs to one space.
std::string normalize_label(std::string_view s);
bool parse_bool(std::string_view s);
double parse_double(std::string_view s, std::string_view field);
long long parse_int(std::string_view s, std::string_view field);

/// Shortest decimal that round-trips the double. NaN prints as "NA".
std::string format_double(double v);

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// RFC 4180-style CSV reader: quoted fields, doubled quotes, embedded commas and newlines.
/// Lines starting with '#' outside a quoted field are artifact header comments and skipped.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    /// Reads the next row. Returns false at end of input.
    bool next(std::vector<std::string>& row);
    /// 1-based physical line number where the last row started.
    std::size_t line() const { return row_line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
    std::size_t row_line_ = 0;
};

std::string csv_escape(std::string_view field);
std::string csv_row(const std::vector<std::string>& fields);

/// Column lookup over a header row; throws InputError naming the missing column.
class CsvHeader {
public:
    explicit CsvHeader(std::vector<std::string> names);
    std::size_t at(std::string_view name) const;
    std::optional<std::size_t> find(std::string_view name) const;
    std::size_t size() const { return names_.size(); }

private:
    std::vector<std::string> names_;
};

// ---------------------------------------------------------------------------
// Time
// ---------------------------------------------------------------------------

/// Parses an RFC 3339 timestamp to UTC seconds since the epoch. Returns nullopt when malformed.
std::optional<std::int64_t> parse_rfc3339(std::string_view s);
std::string format_rfc3339(std::int64_t epoch_seconds);
int utc_year(std::int64_t epoch_seconds);

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);
/// Header line carried by every text artifact.
std::string artifact_header(std::string_view config_hash);

}  // namespace hatescope
