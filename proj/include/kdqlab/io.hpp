#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "kdqlab/error.hpp"
#include "kdqlab/recon.hpp"
#include "kdqlab/trace.hpp"

namespace kdqlab {

/// Shortest round-trip-safe text form (17 significant digits).
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Comma-joined row terminated by a newline.
class CsvRow {
  public:
    CsvRow &operator<<(double v) { return add(format_double(v)); }
    CsvRow &operator<<(const std::string &s) { return add(s); }
    CsvRow &operator<<(const char *s) { return add(s); }
    CsvRow &operator<<(std::size_t v) { return add(std::to_string(v)); }
    CsvRow &operator<<(int v) { return add(std::to_string(v)); }

    [[nodiscard]] std::string str() const { return line_ + "\n"; }

  private:
    CsvRow &add(const std::string &s) {
        if (!first_) line_ += ',';
        line_ += s;
        first_ = false;
        return *this;
    }
    std::string line_;
    bool first_ = true;
};

inline void write_trace_csv(std::ostream &os, const CharFnTrace &trace) {
    os << "u,re_g,im_g\n";
    for (std::size_t k = 0; k < trace.size(); ++k)
        os << (CsvRow{} << trace.u_values[k] << trace.values[k].real() << trace.values[k].imag()).str();
}

inline void write_spectrum_csv(std::ostream &os, const WorkSpectrum &spec) {
    os << "w,re_p,im_p\n";
    for (std::size_t k = 0; k < spec.weights.size(); ++k)
        os << (CsvRow{} << spec.w_values[k] << spec.weights[k].real() << spec.weights[k].imag()).str();
}

inline void write_peaks_csv(std::ostream &os, const std::vector<RecoveredPeak> &peaks) {
    os << "w_target,re_q,im_q,window\n";
    for (const auto &p : peaks) os << (CsvRow{} << p.w_target << p.q.real() << p.q.imag() << p.window).str();
}

namespace detail {

inline std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

inline std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string &text, std::size_t line) {
    const std::string t = trim(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception &) {
        used = 0;
    }
    if (t.empty() || used != t.size())
        throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": not a number: '" + t + "'");
    return v;
}

} // namespace detail

/// Reads the `u,re_g,im_g` format; the result is tagged TraceSource::file.
inline CharFnTrace read_trace_csv(std::istream &is) {
    CharFnTrace trace;
    trace.source = TraceSource::file;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        if (!header) {
            if (t != "u,re_g,im_g")
                throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": expected header u,re_g,im_g");
            header = true;
            continue;
        }
        const auto cols = detail::split(t, ',');
        if (cols.size() != 3)
            throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": expected 3 columns");
        trace.u_values.push_back(detail::parse_number(cols[0], lineno));
        trace.values.emplace_back(detail::parse_number(cols[1], lineno), detail::parse_number(cols[2], lineno));
    }
    if (!header) throw Error(ErrorKind::ParseError, "empty trace file");
    (void)trace.validated_spacing();
    return trace;
}

} // namespace kdqlab
