#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace terratrack {

enum class TerrainClass : uint8_t { Road = 0, Field = 1, Forest = 2 };

inline constexpr std::array<double, 3> kDefaultTerrainProbs = {0.66, 0.33, 0.01};

/// Discrete terrain map: a grid of terrain classes plus the probability
/// p_t(class) that a vehicle chooses to travel on that class of ground.
///
/// Cells are stored row-major from the south-west corner: cells[cy * width + cx]
/// where cx counts east from origin_x and cy counts north from origin_y.
/// Positions outside the grid classify as Forest, so stray particles are
/// damped rather than rejected.
struct TerrainMap {
    int width = 0;
    int height = 0;
    double cell_size = 0.0;
    double origin_x = 0.0;
    double origin_y = 0.0;
    std::vector<TerrainClass> cells;
    std::array<double, 3> p_t = kDefaultTerrainProbs;  // indexed by TerrainClass

    TerrainClass classify(double x, double y) const {
        double fx = std::floor((x - origin_x) / cell_size);
        double fy = std::floor((y - origin_y) / cell_size);
        if (!(fx >= 0.0 && fy >= 0.0 && fx < width && fy < height))
            return TerrainClass::Forest;
        return cells[static_cast<size_t>(fy) * width + static_cast<size_t>(fx)];
    }

    double weight(double x, double y) const {
        return p_t[static_cast<size_t>(classify(x, y))];
    }

    double extent_x() const { return width * cell_size; }
    double extent_y() const { return height * cell_size; }

    TerrainClass& at(int cx, int cy) {
        return cells[static_cast<size_t>(cy) * width + static_cast<size_t>(cx)];
    }
    TerrainClass at(int cx, int cy) const {
        return cells[static_cast<size_t>(cy) * width + static_cast<size_t>(cx)];
    }
};

/// Parses a map from the text format:
///   line 1: width height cell_size origin_x origin_y
///   line 2 (optional): pT <road> <field> <forest>
///   then `height` rows of `width` characters from {R, F, T}, listed
///   north-to-south; whitespace between cell characters is ignored.
/// Throws ParseError (with a line number) on malformed input.
TerrainMap load_map(std::istream& in);
TerrainMap load_map_file(const std::string& path);

/// Writes the canonical form of the same format (pT line always present,
/// rows without separators).
void save_map(const TerrainMap& map, std::ostream& out);
void save_map_file(const TerrainMap& map, const std::string& path);

}  // namespace terratrack
