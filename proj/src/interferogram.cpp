#include "fransim/interferogram.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <system_error>

#include "fransim/errors.hpp"

namespace fransim {

namespace {

constexpr std::string_view kHeader =
    "bin_index,elapsed_s,phase_rad,path_diff_ps,coincidences,accidental_est,"
    "singles_a,singles_b";

void append_fixed(std::string& row, double value, int precision) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value,
                                   std::chars_format::fixed, precision);
    row.append(buf, res.ptr);
}

void append_u64(std::string& row, std::uint64_t value) {
    char buf[24];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    row.append(buf, res.ptr);
}

struct FieldCursor {
    std::string_view line;
    std::size_t pos = 0;      // next unread char
    std::size_t field_col = 1;  // 1-based column of the current field

    std::string_view next(const std::string& origin, int line_no) {
        if (pos > line.size())
            throw ParseError(origin, line_no, static_cast<int>(line.size()) + 1,
                             "expected 8 fields");
        field_col = pos + 1;
        const std::size_t comma = line.find(',', pos);
        std::string_view field;
        if (comma == std::string_view::npos) {
            field = line.substr(pos);
            pos = line.size() + 1;
        } else {
            field = line.substr(pos, comma - pos);
            pos = comma + 1;
        }
        return field;
    }
};

std::uint64_t parse_u64(std::string_view field, const FieldCursor& cur,
                        const std::string& origin, int line_no, const char* what) {
    std::uint64_t value = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw ParseError(origin, line_no, static_cast<int>(cur.field_col),
                         std::string(what) + " must be a non-negative integer");
    return value;
}

double parse_double(std::string_view field, const FieldCursor& cur,
                    const std::string& origin, int line_no, const char* what) {
    double value = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw ParseError(origin, line_no, static_cast<int>(cur.field_col),
                         std::string(what) + " must be a number");
    return value;
}

}  // namespace

void write_interferogram_csv(std::ostream& out, const Interferogram& gram) {
    std::string row;
    row.reserve(160);
    out << kHeader << '\n';
    for (const auto& b : gram.bins) {
        row.clear();
        append_u64(row, b.bin_index);
        row.push_back(',');
        append_fixed(row, b.elapsed_s, 3);
        row.push_back(',');
        append_fixed(row, b.phase_rad, 9);
        row.push_back(',');
        append_fixed(row, b.path_diff_ps, 6);
        row.push_back(',');
        append_u64(row, b.coincidences);
        row.push_back(',');
        append_fixed(row, b.accidental_est, 6);
        row.push_back(',');
        append_u64(row, b.singles_a);
        row.push_back(',');
        append_u64(row, b.singles_b);
        row.push_back('\n');
        out << row;
    }
}

void write_interferogram_csv(const std::string& path, const Interferogram& gram) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    write_interferogram_csv(out, gram);
    out.flush();
    if (!out) throw Error("write to '" + path + "' failed");
}

Interferogram read_interferogram_csv(std::istream& in, const std::string& origin) {
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(origin, 1, 1, "empty file, expected header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader)
        throw ParseError(origin, 1, 1, "bad header, expected '" + std::string(kHeader) + "'");

    Interferogram gram;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        FieldCursor cur{line};
        InterferogramBin b;
        b.bin_index = parse_u64(cur.next(origin, line_no), cur, origin, line_no, "bin_index");
        b.elapsed_s = parse_double(cur.next(origin, line_no), cur, origin, line_no, "elapsed_s");
        b.phase_rad = parse_double(cur.next(origin, line_no), cur, origin, line_no, "phase_rad");
        b.path_diff_ps =
            parse_double(cur.next(origin, line_no), cur, origin, line_no, "path_diff_ps");
        b.coincidences =
            parse_u64(cur.next(origin, line_no), cur, origin, line_no, "coincidences");
        b.accidental_est =
            parse_double(cur.next(origin, line_no), cur, origin, line_no, "accidental_est");
        b.singles_a = parse_u64(cur.next(origin, line_no), cur, origin, line_no, "singles_a");
        b.singles_b = parse_u64(cur.next(origin, line_no), cur, origin, line_no, "singles_b");
        if (cur.pos <= cur.line.size())
            throw ParseError(origin, line_no, static_cast<int>(cur.pos) + 1,
                             "expected 8 fields, found more");
        if (b.accidental_est < 0.0)
            throw ParseError(origin, line_no, 1, "accidental_est must be non-negative");
        gram.bins.push_back(b);
    }
    return gram;
}

Interferogram read_interferogram_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "' for reading");
    return read_interferogram_csv(in, path);
}

}  // namespace fransim
