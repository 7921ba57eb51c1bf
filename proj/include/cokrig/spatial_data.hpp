#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace cokrig {

// Planar location. Coordinates are in arbitrary (but consistent) units.
struct Location {
    double x = 0.0;
    double y = 0.0;
};

// Exact bitwise equality of both coordinates; used for duplicate detection
// and for deciding where nugget and measurement-error terms apply.
bool same_location(const Location& a, const Location& b) noexcept;
double distance(const Location& a, const Location& b) noexcept;
bool is_finite(const Location& s) noexcept;

// Ordered, nonempty list of finite locations.
class LocationSet {
public:
    LocationSet() = default;
    explicit LocationSet(std::vector<Location> locations);

    std::size_t size() const noexcept { return locations_.size(); }
    bool empty() const noexcept { return locations_.empty(); }
    const Location& operator[](std::size_t i) const { return locations_[i]; }
    const std::vector<Location>& points() const noexcept { return locations_; }
    auto begin() const noexcept { return locations_.begin(); }
    auto end() const noexcept { return locations_.end(); }

private:
    std::vector<Location> locations_;
};

// Observations of one variable. Variable indices are zero-based inside the
// library; files and the CLI use one-based ids.
class VariableSeries {
public:
    VariableSeries(std::size_t variable, std::vector<Location> locations, std::vector<double> values);

    std::size_t variable() const noexcept { return variable_; }
    std::size_t size() const noexcept { return values_.size(); }
    const LocationSet& locations() const noexcept { return locations_; }
    const std::vector<double>& values() const noexcept { return values_; }
    double mean() const;

private:
    std::size_t variable_;
    LocationSet locations_;
    std::vector<double> values_;
};

class MultivariateDataset {
public:
    explicit MultivariateDataset(std::vector<VariableSeries> series);

    std::size_t variables() const noexcept { return series_.size(); }
    std::size_t total_size() const noexcept;
    const VariableSeries& operator[](std::size_t q) const { return series_[q]; }
    const std::vector<VariableSeries>& series() const noexcept { return series_; }

    // Per-variable location sets, in variable order.
    std::vector<LocationSet> location_sets() const;
    // All values stacked variable by variable (matches joint-matrix ordering).
    Eigen::VectorXd stacked_values() const;

private:
    std::vector<VariableSeries> series_;
};

// Column names looked up in the CSV header.
struct CsvSchema {
    std::string variable = "variable";
    std::string x = "x";
    std::string y = "y";
    std::string value = "value";
};

struct LoadedDataset {
    MultivariateDataset data;
    // (original id, new one-based id), sorted by original id.
    std::vector<std::pair<std::int64_t, std::size_t>> id_map;
};

LoadedDataset parse_dataset(std::istream& in, const CsvSchema& schema = {}, const std::string& source = "<stream>");
LoadedDataset load_dataset(const std::filesystem::path& path, const CsvSchema& schema = {});
// Writes the `variable,x,y,value` CSV with one-based variable ids and
// round-trip precision.
void write_dataset(std::ostream& out, const MultivariateDataset& data);
// `original_id -> new_id` lines.
void write_id_map(std::ostream& out, const LoadedDataset& loaded);

// counts(q, r) = number of location pairs of variables q and r within
// Euclidean distance tol. Off-diagonal: all cross pairs; diagonal: unordered
// pairs of distinct observations.
Eigen::MatrixXi collocation_report(const MultivariateDataset& data, double tol);

// Regular nx-by-ny grid in row-major order (x fastest), endpoints inclusive.
LocationSet make_grid(double xmin, double xmax, double ymin, double ymax, long nx, long ny);

// Index of the location in `set` nearest to `s` (first one on ties).
std::size_t nearest_index(const LocationSet& set, const Location& s);

} // namespace cokrig
