#include "terratrack/terrain.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "terratrack/errors.hpp"
#include "terratrack/text.hpp"

namespace terratrack {

namespace {

char class_char(TerrainClass c) {
    switch (c) {
        case TerrainClass::Road: return 'R';
        case TerrainClass::Field: return 'F';
        case TerrainClass::Forest: return 'T';
    }
    return '?';
}

bool next_content_line(std::istream& in, std::string& line, int& line_no) {
    while (std::getline(in, line)) {
        ++line_no;
        for (char c : line)
            if (!std::isspace(static_cast<unsigned char>(c))) return true;
    }
    return false;
}

}  // namespace

TerrainMap load_map(std::istream& in) {
    TerrainMap map;
    std::string line;
    int line_no = 0;

    if (!next_content_line(in, line, line_no))
        throw ParseError(line_no, "missing map header");
    {
        std::istringstream hs(line);
        if (!(hs >> map.width >> map.height >> map.cell_size >> map.origin_x >>
              map.origin_y))
            throw ParseError(line_no,
                             "header must be: width height cell_size origin_x origin_y");
        std::string extra;
        if (hs >> extra)
            throw ParseError(line_no, "unexpected token in header: " + extra);
    }
    if (map.width <= 0 || map.height <= 0)
        throw ParseError(line_no, "map dimensions must be positive");
    if (!(map.cell_size > 0.0))
        throw ParseError(line_no, "cell_size must be > 0");

    if (!next_content_line(in, line, line_no))
        throw ParseError(line_no, "missing map rows");

    if (line.find("pT") != std::string::npos || line.find("pt") != std::string::npos) {
        std::istringstream ps(line);
        std::string tag;
        ps >> tag;
        if (tag != "pT" && tag != "pt")
            throw ParseError(line_no, "expected pT line or map row");
        if (!(ps >> map.p_t[0] >> map.p_t[1] >> map.p_t[2]))
            throw ParseError(line_no, "pT line must carry three probabilities");
        for (double p : map.p_t)
            if (!(p > 0.0 && p <= 1.0))
                throw ParseError(line_no, "pT values must lie in (0, 1]");
        if (!next_content_line(in, line, line_no))
            throw ParseError(line_no, "missing map rows");
    }

    map.cells.assign(static_cast<size_t>(map.width) * map.height,
                     TerrainClass::Forest);

    // Rows appear north-to-south; storage is south-up.
    for (int row = 0;; ++row) {
        int filled = 0;
        int cy = map.height - 1 - row;
        for (char c : line) {
            if (std::isspace(static_cast<unsigned char>(c))) continue;
            if (filled >= map.width)
                throw ParseError(line_no, "row has more than " +
                                              std::to_string(map.width) + " cells");
            TerrainClass tc;
            switch (c) {
                case 'R': tc = TerrainClass::Road; break;
                case 'F': tc = TerrainClass::Field; break;
                case 'T': tc = TerrainClass::Forest; break;
                default:
                    throw ParseError(line_no, std::string("unknown cell character '") +
                                                  c + "'");
            }
            map.at(filled, cy) = tc;
            ++filled;
        }
        if (filled != map.width)
            throw ParseError(line_no, "row has " + std::to_string(filled) +
                                          " cells, expected " +
                                          std::to_string(map.width));
        if (row + 1 == map.height) break;
        if (!next_content_line(in, line, line_no))
            throw ParseError(line_no + 1, "missing map row " + std::to_string(row + 2));
    }
    return map;
}

TerrainMap load_map_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open map file: " + path);
    return load_map(in);
}

void save_map(const TerrainMap& map, std::ostream& out) {
    out << map.width << ' ' << map.height << ' ' << format_double(map.cell_size) << ' '
        << format_double(map.origin_x) << ' ' << format_double(map.origin_y) << '\n';
    out << "pT " << format_double(map.p_t[0]) << ' ' << format_double(map.p_t[1]) << ' '
        << format_double(map.p_t[2]) << '\n';
    for (int row = 0; row < map.height; ++row) {
        int cy = map.height - 1 - row;
        for (int cx = 0; cx < map.width; ++cx) out << class_char(map.at(cx, cy));
        out << '\n';
    }
}

void save_map_file(const TerrainMap& map, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open map file for writing: " + path);
    save_map(map, out);
}

}  // namespace terratrack
