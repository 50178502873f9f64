#include "tsf/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "tsf/errors.hpp"

namespace tsf::csv {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::string fmt(double v) { return format_double(v); }

double parse_double(const std::string& cell, std::size_t row, const std::string& col) {
    double v = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end) {
        throw FormatError("csv: non-numeric cell '" + cell + "' at row " + std::to_string(row) +
                          ", column " + col);
    }
    return v;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Table read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("csv: cannot open " + path.string());
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw FormatError("csv: empty file " + path.string());
    t.header = split_line(line);
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != t.header.size()) {
            throw FormatError("csv: row " + std::to_string(row) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(t.header.size()));
        }
        t.rows.push_back(std::move(cells));
    }
    return t;
}

std::size_t column_index(const Table& t, const std::string& name) {
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        if (t.header[i] == name) return i;
    }
    throw FormatError("csv: missing column " + name);
}

// Rows arrive grouped by series with t strictly increasing inside each group.
SeriesSet assemble(const Table& t, int n, std::size_t col_t, std::size_t col_sid,
                   const std::vector<std::size_t>& col_x, const std::vector<std::size_t>& col_u,
                   std::size_t col_extra, bool extra_is_alpha) {
    SeriesSet set;
    set.n = n;
    Series cur;
    bool have_cur = false;
    double prev_t = 0.0;
    std::vector<std::vector<double>> xs(n), us(n);

    auto flush = [&]() {
        if (!have_cur) return;
        cur.len = static_cast<int>(xs[0].size());
        cur.n = n;
        cur.x.clear();
        cur.u.clear();
        for (int d = 0; d < n; ++d) cur.x.insert(cur.x.end(), xs[d].begin(), xs[d].end());
        for (int d = 0; d < n; ++d) cur.u.insert(cur.u.end(), us[d].begin(), us[d].end());
        set.series.push_back(cur);
        for (auto& v : xs) v.clear();
        for (auto& v : us) v.clear();
    };

    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& cells = t.rows[r];
        const std::size_t file_row = r + 2;  // 1-based, after header
        const int sid = static_cast<int>(parse_double(cells[col_sid], file_row, "series_id"));
        const double tv = parse_double(cells[col_t], file_row, "t");
        if (!have_cur || sid != cur.id) {
            flush();
            cur = Series{};
            cur.id = sid;
            have_cur = true;
        } else if (tv <= prev_t) {
            throw FormatError("csv: non-monotonic t at row " + std::to_string(file_row) +
                              " within series " + std::to_string(sid));
        }
        prev_t = tv;
        for (int d = 0; d < n; ++d) {
            xs[d].push_back(parse_double(cells[col_x[d]], file_row, "x" + std::to_string(d + 1)));
            us[d].push_back(parse_double(cells[col_u[d]], file_row, "u" + std::to_string(d + 1)));
        }
        if (col_extra != std::size_t(-1)) {
            const double ev = parse_double(cells[col_extra], file_row,
                                           extra_is_alpha ? "alpha" : "omega_r");
            if (extra_is_alpha) {
                cur.alpha = ev;
            } else {
                cur.omega = ev;
            }
        }
    }
    flush();
    return set;
}

}  // namespace

std::string serialize(const SeriesSet& set, SchemaKind kind) {
    std::ostringstream out;
    const int n = set.n;
    if (kind == SchemaKind::narma) {
        out << "t";
        for (int d = 0; d < n; ++d) out << ",x" << d + 1;
        for (int d = 0; d < n; ++d) out << ",u" << d + 1;
        out << ",series_id,alpha\n";
    } else {
        out << "t,i_d,i_q,u_d,u_q,omega_r,series_id\n";
    }
    for (const Series& sr : set.series) {
        for (int t = 0; t < sr.len; ++t) {
            if (kind == SchemaKind::narma) {
                out << t;
                for (int d = 0; d < n; ++d) out << ',' << fmt(sr.x_at(d, t));
                for (int d = 0; d < n; ++d) out << ',' << fmt(sr.u_at(d, t));
                out << ',' << sr.id << ',' << fmt(sr.alpha) << '\n';
            } else {
                out << t << ',' << fmt(sr.x_at(0, t)) << ',' << fmt(sr.x_at(1, t)) << ','
                    << fmt(sr.u_at(0, t)) << ',' << fmt(sr.u_at(1, t)) << ',' << fmt(sr.omega)
                    << ',' << sr.id << '\n';
            }
        }
    }
    return out.str();
}

void write_series(const std::filesystem::path& path, const SeriesSet& set, SchemaKind kind) {
    std::ofstream out(path, std::ios::binary);  // binary: no newline translation
    if (!out) throw IoError("csv: cannot write " + path.string());
    const std::string body = serialize(set, kind);
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw IoError("csv: write failed for " + path.string());
}

SeriesSet read_narma(const std::filesystem::path& path) {
    const Table t = read_table(path);
    // Infer n from paired x*/u* columns.
    int n = 0;
    while (true) {
        const std::string xc = "x" + std::to_string(n + 1);
        bool found = false;
        for (const auto& h : t.header) {
            if (h == xc) found = true;
        }
        if (!found) break;
        ++n;
    }
    if (n == 0) throw FormatError("csv: no state columns (x1..) in " + path.string());
    std::vector<std::size_t> col_x(n), col_u(n);
    for (int d = 0; d < n; ++d) {
        col_x[d] = column_index(t, "x" + std::to_string(d + 1));
        col_u[d] = column_index(t, "u" + std::to_string(d + 1));
    }
    return assemble(t, n, column_index(t, "t"), column_index(t, "series_id"), col_x, col_u,
                    column_index(t, "alpha"), true);
}

SeriesSet read_motor(const std::filesystem::path& path, const ColumnMap& columns) {
    const Table t = read_table(path);
    auto mapped = [&](const std::string& logical) {
        const auto it = columns.find(logical);
        return it == columns.end() ? logical : it->second;
    };
    const std::vector<std::size_t> col_x = {column_index(t, mapped("i_d")),
                                            column_index(t, mapped("i_q"))};
    const std::vector<std::size_t> col_u = {column_index(t, mapped("u_d")),
                                            column_index(t, mapped("u_q"))};
    return assemble(t, 2, column_index(t, mapped("t")), column_index(t, mapped("series_id")),
                    col_x, col_u, column_index(t, mapped("omega_r")), false);
}

}  // namespace tsf::csv
