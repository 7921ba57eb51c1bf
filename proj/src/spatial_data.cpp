#include "cokrig/spatial_data.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <limits>
#include <tuple>

#include "cokrig/error.hpp"

namespace cokrig {

bool same_location(const Location& a, const Location& b) noexcept {
    return std::bit_cast<std::uint64_t>(a.x) == std::bit_cast<std::uint64_t>(b.x) &&
           std::bit_cast<std::uint64_t>(a.y) == std::bit_cast<std::uint64_t>(b.y);
}

double distance(const Location& a, const Location& b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

bool is_finite(const Location& s) noexcept { return std::isfinite(s.x) && std::isfinite(s.y); }

LocationSet::LocationSet(std::vector<Location> locations) : locations_(std::move(locations)) {
    if (locations_.empty()) {
        throw InputError("location set is empty");
    }
    for (std::size_t i = 0; i < locations_.size(); ++i) {
        if (!is_finite(locations_[i])) {
            throw InputError("non-finite coordinate at location " + std::to_string(i));
        }
    }
}

namespace {

struct BitwiseLess {
    bool operator()(const Location& a, const Location& b) const noexcept {
        return std::tuple(std::bit_cast<std::uint64_t>(a.x), std::bit_cast<std::uint64_t>(a.y)) <
               std::tuple(std::bit_cast<std::uint64_t>(b.x), std::bit_cast<std::uint64_t>(b.y));
    }
};

} // namespace

VariableSeries::VariableSeries(std::size_t variable, std::vector<Location> locations, std::vector<double> values)
    : variable_(variable), values_(std::move(values)) {
    if (locations.size() != values_.size()) {
        throw InputError("series " + std::to_string(variable + 1) + ": locations and values differ in length");
    }
    if (values_.empty()) {
        throw InputError("series " + std::to_string(variable + 1) + " is empty");
    }
    std::set<Location, BitwiseLess> seen;
    for (const auto& s : locations) {
        if (!seen.insert(s).second) {
            throw InputError("series " + std::to_string(variable + 1) + ": duplicate location (" +
                             std::to_string(s.x) + ", " + std::to_string(s.y) + ")");
        }
    }
    locations_ = LocationSet(std::move(locations));
}

double VariableSeries::mean() const {
    double sum = 0.0;
    for (double v : values_) sum += v;
    return sum / static_cast<double>(values_.size());
}

MultivariateDataset::MultivariateDataset(std::vector<VariableSeries> series) : series_(std::move(series)) {
    if (series_.empty()) {
        throw InputError("dataset has no variables");
    }
    for (std::size_t q = 0; q < series_.size(); ++q) {
        if (series_[q].variable() != q) {
            throw InputError("variable ids must be contiguous and ordered");
        }
    }
}

std::size_t MultivariateDataset::total_size() const noexcept {
    std::size_t n = 0;
    for (const auto& s : series_) n += s.size();
    return n;
}

std::vector<LocationSet> MultivariateDataset::location_sets() const {
    std::vector<LocationSet> out;
    out.reserve(series_.size());
    for (const auto& s : series_) out.push_back(s.locations());
    return out;
}

Eigen::VectorXd MultivariateDataset::stacked_values() const {
    Eigen::VectorXd z(static_cast<Eigen::Index>(total_size()));
    Eigen::Index k = 0;
    for (const auto& s : series_) {
        for (double v : s.values()) z(k++) = v;
    }
    return z;
}

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string_view rest(line);
    while (true) {
        auto comma = rest.find(',');
        cells.push_back(trim(rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return cells;
}

bool parse_double(const std::string& cell, double& out) {
    if (cell.empty()) return false;
    const char* first = cell.data();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), out);
    return ec == std::errc() && ptr == cell.data() + cell.size();
}

bool parse_int(const std::string& cell, std::int64_t& out) {
    if (cell.empty()) return false;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    return ec == std::errc() && ptr == cell.data() + cell.size();
}

} // namespace

LoadedDataset parse_dataset(std::istream& in, const CsvSchema& schema, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header = split_csv(line);
            break;
        }
    }
    if (header.empty()) {
        throw InputError(source + ": empty file");
    }
    if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);

    auto column = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw InputError(source + ": header lacks column '" + name + "'");
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t cv = column(schema.variable), cx = column(schema.x), cy = column(schema.y),
                      cz = column(schema.value);

    struct Row {
        std::int64_t id;
        Location s;
        double value;
        std::size_t line;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_csv(line);
        auto where = source + ": line " + std::to_string(line_no);
        if (cells.size() != header.size()) {
            throw InputError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                             std::to_string(cells.size()));
        }
        Row row{};
        row.line = line_no;
        if (!parse_int(cells[cv], row.id)) throw InputError(where + ": malformed variable id '" + cells[cv] + "'");
        if (!parse_double(cells[cx], row.s.x) || !parse_double(cells[cy], row.s.y)) {
            throw InputError(where + ": malformed coordinate");
        }
        if (!is_finite(row.s)) throw InputError(where + ": non-finite coordinate");
        if (!parse_double(cells[cz], row.value)) throw InputError(where + ": malformed value '" + cells[cz] + "'");
        if (!std::isfinite(row.value)) throw InputError(where + ": non-finite value");
        rows.push_back(row);
    }
    if (rows.empty()) {
        throw InputError(source + ": empty file (no observations)");
    }

    std::map<std::int64_t, std::size_t> ids;
    for (const auto& row : rows) ids.emplace(row.id, 0);
    std::size_t next = 0;
    for (auto& [id, idx] : ids) idx = next++;

    std::vector<std::vector<Location>> locs(ids.size());
    std::vector<std::vector<double>> vals(ids.size());
    std::vector<std::set<Location, BitwiseLess>> seen(ids.size());
    for (const auto& row : rows) {
        auto q = ids.at(row.id);
        if (!seen[q].insert(row.s).second) {
            throw InputError(source + ": line " + std::to_string(row.line) + ": duplicate location for variable " +
                             std::to_string(row.id));
        }
        locs[q].push_back(row.s);
        vals[q].push_back(row.value);
    }
    std::vector<VariableSeries> series;
    for (std::size_t q = 0; q < ids.size(); ++q) series.emplace_back(q, std::move(locs[q]), std::move(vals[q]));

    LoadedDataset out{MultivariateDataset(std::move(series)), {}};
    for (const auto& [id, idx] : ids) out.id_map.emplace_back(id, idx + 1);
    return out;
}

LoadedDataset load_dataset(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open data file '" + path.string() + "'");
    }
    return parse_dataset(in, schema, path.string());
}

void write_dataset(std::ostream& out, const MultivariateDataset& data) {
    out << "variable,x,y,value\n";
    auto old = out.precision(17);
    for (const auto& s : data.series()) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            const auto& loc = s.locations()[i];
            out << s.variable() + 1 << ',' << loc.x << ',' << loc.y << ',' << s.values()[i] << '\n';
        }
    }
    out.precision(old);
}

void write_id_map(std::ostream& out, const LoadedDataset& loaded) {
    for (const auto& [orig, id] : loaded.id_map) out << orig << " -> " << id << '\n';
}

Eigen::MatrixXi collocation_report(const MultivariateDataset& data, double tol) {
    if (!(tol >= 0.0)) throw InputError("collocation tolerance must be >= 0");
    const auto p = data.variables();
    Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    for (std::size_t q = 0; q < p; ++q) {
        const auto& a = data[q].locations();
        for (std::size_t r = q; r < p; ++r) {
            const auto& b = data[r].locations();
            int count = 0;
            for (std::size_t i = 0; i < a.size(); ++i) {
                for (std::size_t j = (q == r ? i + 1 : 0); j < b.size(); ++j) {
                    if (distance(a[i], b[j]) <= tol) ++count;
                }
            }
            counts(q, r) = counts(r, q) = count;
        }
    }
    return counts;
}

LocationSet make_grid(double xmin, double xmax, double ymin, double ymax, long nx, long ny) {
    if (nx <= 0 || ny <= 0) throw InputError("grid counts must be positive");
    if (!std::isfinite(xmin) || !std::isfinite(xmax) || !std::isfinite(ymin) || !std::isfinite(ymax)) {
        throw InputError("grid bounds must be finite");
    }
    if (xmax < xmin || ymax < ymin) throw InputError("grid bounds are inverted");
    if ((xmax == xmin && nx > 1) || (ymax == ymin && ny > 1)) {
        throw InputError("degenerate grid axis with more than one node");
    }
    auto coord = [](double lo, double hi, long n, long i) {
        if (n == 1) return lo;
        if (i == n - 1) return hi;
        return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    };
    std::vector<Location> locs;
    locs.reserve(static_cast<std::size_t>(nx * ny));
    for (long j = 0; j < ny; ++j) {
        for (long i = 0; i < nx; ++i) locs.push_back({coord(xmin, xmax, nx, i), coord(ymin, ymax, ny, j)});
    }
    return LocationSet(std::move(locs));
}

std::size_t nearest_index(const LocationSet& set, const Location& s) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < set.size(); ++i) {
        const double dx = set[i].x - s.x, dy = set[i].y - s.y;
        const double d = dx * dx + dy * dy;
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

} // namespace cokrig
