#include "degraf/csv_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace degraf {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

}  // namespace

void write_keypoints_csv(std::span<const Point2> points, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(path, "cannot open file for writing");
    out << "x,y\n";
    char buf[80];
    for (const Point2& p : points) {
        std::snprintf(buf, sizeof(buf), "%.4f,%.4f\n", p.x, p.y);
        out << buf;
    }
    if (!out) fail(path, "write error");
}

std::vector<Point2> read_keypoints_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(path, "cannot open file");
    std::string line;
    if (!std::getline(in, line) || split_fields(line).size() != 2) {
        fail(path, "missing x,y header");
    }
    std::vector<Point2> points;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 2) fail(path, "bad field count at line " + std::to_string(lineno));
        try {
            points.push_back({std::stod(fields[0]), std::stod(fields[1])});
        } catch (const std::exception&) {
            fail(path, "bad number at line " + std::to_string(lineno));
        }
    }
    return points;
}

void write_sparse_flow_csv(const SparseFlow& flow, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(path, "cannot open file for writing");
    out << "x,y,u,v,status\n";
    char buf[160];
    for (const FlowRecord& r : flow.records) {
        std::snprintf(buf, sizeof(buf), "%.4f,%.4f,%.4f,%.4f,%s\n", r.origin.x, r.origin.y,
                      r.du, r.dv, to_string(r.status));
        out << buf;
    }
    if (!out) fail(path, "write error");
}

SparseFlow read_sparse_flow_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(path, "cannot open file");
    std::string line;
    if (!std::getline(in, line) || split_fields(line).size() != 5) {
        fail(path, "missing x,y,u,v,status header");
    }
    SparseFlow flow;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 5) fail(path, "bad field count at line " + std::to_string(lineno));
        FlowRecord rec;
        try {
            rec.origin = {std::stod(fields[0]), std::stod(fields[1])};
            rec.du = std::stod(fields[2]);
            rec.dv = std::stod(fields[3]);
        } catch (const std::exception&) {
            fail(path, "bad number at line " + std::to_string(lineno));
        }
        if (!track_status_from_string(fields[4], rec.status)) {
            fail(path, "unknown status at line " + std::to_string(lineno));
        }
        flow.records.push_back(rec);
    }
    return flow;
}

}  // namespace degraf
