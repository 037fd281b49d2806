#include "hgp/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "hgp/errors.hpp"
#include "hgp/rng.hpp"

namespace hgp {

namespace {

constexpr int kMaxGapHours = 3;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               std::size_t expected_fields, const char* expected_header) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (line_no == 1 && expected_header != nullptr) {
            if (line != expected_header) {
                throw InputError(path.string() + ": expected header '" + std::string(expected_header) +
                                 "', got '" + line + "'");
            }
            continue;
        }
        if (fields.size() != expected_fields) {
            throw InputError(path.string() + " row " + std::to_string(line_no) + ": expected " +
                             std::to_string(expected_fields) + " fields, got " +
                             std::to_string(fields.size()));
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

double parse_double(const std::string& s, const std::string& context) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw InputError(context + ": not a number: '" + s + "'");
    return v;
}

std::size_t parse_index(const std::string& s, const std::string& context) {
    std::size_t v = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw InputError(context + ": not an index: '" + s + "'");
    return v;
}

// Days since 1970-01-01 for a civil date (Gregorian, proleptic).
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yr + (m <= 2));
}

}  // namespace

std::int64_t parse_hour_timestamp(const std::string& iso) {
    // Strict "YYYY-MM-DDTHH:00:00" (hourly resolution).
    int y, mo, d, h, mi, s;
    char sep;
    if (std::sscanf(iso.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d", &y, &mo, &d, &sep, &h, &mi, &s) != 7 ||
        (sep != 'T' && sep != ' ')) {
        throw InputError("bad timestamp '" + iso + "' (expected YYYY-MM-DDTHH:MM:SS)");
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23) {
        throw InputError("bad timestamp '" + iso + "'");
    }
    if (mi != 0 || s != 0) {
        throw InputError("timestamp '" + iso + "' is not on the hour");
    }
    return days_from_civil(y, mo, d) * 24 + h;
}

std::string format_hour_timestamp(std::int64_t hours) {
    std::int64_t days = hours / 24;
    int h = static_cast<int>(hours % 24);
    if (h < 0) {
        h += 24;
        days -= 1;
    }
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:00:00", y, m, d, h);
    return buf;
}

Dataset load_dataset(const std::filesystem::path& signals_csv, const std::filesystem::path& topology_csv,
                     const std::filesystem::path& lengths_csv) {
    Dataset ds;

    // Road identity and ordering come from the lengths file.
    std::unordered_map<std::string, std::size_t> road_index;
    for (const auto& row : read_csv(lengths_csv, 2, "road_id,length_m")) {
        const std::string& id = row[0];
        if (road_index.count(id)) throw InputError(lengths_csv.string() + ": duplicate road_id " + id);
        road_index.emplace(id, ds.road_ids.size());
        ds.road_ids.push_back(id);
        const double len = parse_double(row[1], lengths_csv.string());
        if (!(len > 0.0)) throw InputError(lengths_csv.string() + ": road " + id + " has non-positive length");
        ds.topology.length_m.push_back(len);
    }
    const std::size_t n = ds.road_ids.size();
    if (n == 0) throw InputError(lengths_csv.string() + ": no roads");
    ds.topology.roads = n;

    for (const auto& row : read_csv(topology_csv, 2, "road_a,road_b")) {
        const std::size_t a = parse_index(row[0], topology_csv.string());
        const std::size_t b = parse_index(row[1], topology_csv.string());
        ds.topology.edges.emplace_back(a, b);
    }
    ds.topology.validate();

    // Per-road hour -> [flow, occupancy, speed].
    std::vector<std::map<std::int64_t, std::array<double, 3>>> series(n);
    std::int64_t lo = 0, hi = 0;
    bool first = true;
    for (const auto& row : read_csv(signals_csv, 5, "timestamp,sensor_id,flow,occupancy,speed")) {
        const std::int64_t t = parse_hour_timestamp(row[0]);
        auto it = road_index.find(row[1]);
        if (it == road_index.end()) {
            throw InputError(signals_csv.string() + ": unknown sensor id '" + row[1] + "'");
        }
        std::array<double, 3> vals;
        for (std::size_t s = 0; s < 3; ++s) {
            vals[s] = parse_double(row[2 + s], signals_csv.string());
            if (vals[s] < 0.0) {
                throw InputError(signals_csv.string() + ": negative value for sensor " + row[1] + " at " +
                                 row[0]);
            }
        }
        if (!series[it->second].emplace(t, vals).second) {
            throw InputError(signals_csv.string() + ": duplicate row for sensor " + row[1] + " at " + row[0]);
        }
        lo = first ? t : std::min(lo, t);
        hi = first ? t : std::max(hi, t);
        first = false;
    }
    if (first) throw InputError(signals_csv.string() + ": no data rows");

    const std::size_t timestamps = static_cast<std::size_t>(hi - lo + 1);
    ds.start_hour = lo;
    ds.tensor = TrafficTensor(timestamps, n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto& obs = series[r];
        if (obs.empty()) throw InputError(signals_csv.string() + ": no rows for sensor " + ds.road_ids[r]);
        if (obs.begin()->first != lo || obs.rbegin()->first != hi) {
            throw InputError(signals_csv.string() + ": sensor " + ds.road_ids[r] +
                             " does not cover the full time range " + format_hour_timestamp(lo) + ".." +
                             format_hour_timestamp(hi));
        }
        std::int64_t prev_t = lo;
        std::array<double, 3> prev_v = obs.begin()->second;
        for (const auto& [t, v] : obs) {
            const std::int64_t gap = t - prev_t;
            if (gap > kMaxGapHours + 1) {
                throw InputError(signals_csv.string() + ": sensor " + ds.road_ids[r] + " has a " +
                                 std::to_string(gap - 1) + "h gap after " + format_hour_timestamp(prev_t) +
                                 " (fill limit " + std::to_string(kMaxGapHours) + "h)");
            }
            for (std::int64_t k = 1; k < gap; ++k) {  // linear fill of interior hours
                const double f = static_cast<double>(k) / static_cast<double>(gap);
                for (std::size_t s = 0; s < 3; ++s) {
                    ds.tensor.at(static_cast<std::size_t>(prev_t - lo + k), r, s) =
                        prev_v[s] + f * (v[s] - prev_v[s]);
                }
            }
            for (std::size_t s = 0; s < 3; ++s) ds.tensor.at(static_cast<std::size_t>(t - lo), r, s) = v[s];
            prev_t = t;
            prev_v = v;
        }
    }
    return ds;
}

std::pair<TrafficTensor, NormalizationStats> minmax_normalize(const TrafficTensor& tensor,
                                                              std::size_t train_timestamps) {
    if (train_timestamps == 0 || train_timestamps > tensor.timestamps()) {
        throw ConfigError("minmax_normalize: train span " + std::to_string(train_timestamps) +
                          " outside 1.." + std::to_string(tensor.timestamps()));
    }
    NormalizationStats stats;
    for (std::size_t s = 0; s < 3; ++s) {
        double lo = tensor.at(0, 0, s), hi = lo;
        for (std::size_t t = 0; t < train_timestamps; ++t) {
            for (std::size_t r = 0; r < tensor.roads(); ++r) {
                lo = std::min(lo, tensor.at(t, r, s));
                hi = std::max(hi, tensor.at(t, r, s));
            }
        }
        stats.min[s] = lo;
        stats.max[s] = hi;
    }
    TrafficTensor out(tensor.timestamps(), tensor.roads());
    for (std::size_t t = 0; t < tensor.timestamps(); ++t) {
        for (std::size_t r = 0; r < tensor.roads(); ++r) {
            for (std::size_t s = 0; s < 3; ++s) {
                const double span = stats.max[s] - stats.min[s];
                double v = span > 0.0 ? (tensor.at(t, r, s) - stats.min[s]) / span : 0.0;
                out.at(t, r, s) = std::clamp(v, 0.0, 1.0);
            }
        }
    }
    return {std::move(out), stats};
}

std::vector<std::size_t> SampleSet::indices_of(Split split) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < items.size(); ++i)
        if (items[i].split == split) out.push_back(i);
    return out;
}

std::vector<int> SampleSet::labels(std::size_t item_index) const {
    const Item& it = items[item_index];
    const std::size_t t_label = it.t_end + static_cast<std::size_t>(horizon);
    std::vector<int> out(grades->roads);
    for (std::size_t r = 0; r < grades->roads; ++r) out[r] = grades->at(r, t_label);
    return out;
}

SampleSet make_samples(std::shared_ptr<const TrafficTensor> tensor,
                       std::shared_ptr<const GradeMatrix> grades, std::size_t window, int horizon,
                       const SplitFractions& fractions) {
    if (horizon < 1) throw ConfigError("make_samples: horizon must be >= 1");
    if (window < 1) throw ConfigError("make_samples: window must be >= 1");
    const std::size_t T = tensor->timestamps();
    const std::size_t h = static_cast<std::size_t>(horizon);
    if (T < window + h) {
        throw InputError("make_samples: T=" + std::to_string(T) + " is shorter than window+horizon=" +
                         std::to_string(window + h));
    }
    const double frac_sum = fractions.train + fractions.val + fractions.test;
    if (std::abs(frac_sum - 1.0) > 1e-9) throw ConfigError("make_samples: split fractions must sum to 1");

    SampleSet set;
    set.tensor = std::move(tensor);
    set.grades = std::move(grades);
    set.window = window;
    set.horizon = horizon;

    const std::size_t train_end = static_cast<std::size_t>(fractions.train * static_cast<double>(T));
    const std::size_t val_end =
        static_cast<std::size_t>((fractions.train + fractions.val) * static_cast<double>(T));

    for (std::size_t t_end = window - 1; t_end + h <= T - 1; ++t_end) {
        const std::size_t span_lo = t_end + 1 - window;
        const std::size_t span_hi = t_end + h;  // inclusive
        Split split = Split::Excluded;
        if (span_hi < train_end) {
            split = Split::Train;
        } else if (span_lo >= train_end && span_hi < val_end) {
            split = Split::Val;
        } else if (span_lo >= val_end) {
            split = Split::Test;
        }
        set.items.push_back({t_end, split});
    }
    return set;
}

Dataset synth_dataset(std::size_t roads, std::size_t days, std::uint64_t seed) {
    if (roads < 2) throw ConfigError("synth_dataset: need at least 2 roads");
    if (days < 2) throw ConfigError("synth_dataset: need at least 2 days");

    Dataset ds;
    ds.start_hour = parse_hour_timestamp("2019-01-01T00:00:00");
    ds.topology.roads = roads;

    Rng topo_rng(seed, "synth/topology");
    for (std::size_t v = 1; v < roads; ++v) {
        ds.topology.edges.emplace_back(topo_rng.uniform_int(v), v);  // spanning tree
    }
    const std::size_t extra = roads / 3;
    for (std::size_t k = 0; k < extra; ++k) {
        const std::size_t a = topo_rng.uniform_int(roads);
        const std::size_t b = topo_rng.uniform_int(roads);
        if (a == b) continue;
        ds.topology.edges.emplace_back(std::min(a, b), std::max(a, b));
    }
    ds.topology.length_m.resize(roads);
    for (double& len : ds.topology.length_m) len = topo_rng.uniform(200.0, 2000.0);

    const std::size_t T = days * 24;
    ds.tensor = TrafficTensor(T, roads);
    Rng rng(seed, "synth/signals");
    for (std::size_t r = 0; r < roads; ++r) {
        const double base_flow = rng.uniform(250.0, 600.0);
        const double amplitude = rng.uniform(0.5, 0.9) * base_flow;
        const double phase = rng.uniform(0.0, 24.0);
        const double free_speed = rng.uniform(70.0, 110.0);
        const double noise_flow = 0.03 * base_flow;
        const double noise_speed = 0.02 * free_speed;
        for (std::size_t t = 0; t < T; ++t) {
            const double hour = static_cast<double>(t);
            // Daily profile with a sharper secondary peak.
            const double cycle = std::sin(2.0 * std::numbers::pi * (hour - phase) / 24.0);
            const double second = 0.35 * std::sin(4.0 * std::numbers::pi * (hour - phase) / 24.0);
            double flow = base_flow + amplitude * (0.65 * cycle + second) + noise_flow * rng.normal();
            flow = std::max(flow, 0.0);
            const double load = flow / (base_flow + amplitude);
            double speed = free_speed * (1.0 - 0.55 * load) + noise_speed * rng.normal();
            speed = std::max(speed, 5.0);
            // Monotone: rises with flow, falls with speed.
            const double occupancy = flow / (flow + 4.0 * speed);
            ds.tensor.at(t, r, TrafficTensor::Flow) = flow;
            ds.tensor.at(t, r, TrafficTensor::Occupancy) = occupancy;
            ds.tensor.at(t, r, TrafficTensor::Speed) = speed;
        }
    }
    ds.road_ids.resize(roads);
    for (std::size_t r = 0; r < roads; ++r) ds.road_ids[r] = std::to_string(r);
    return ds;
}

void write_dataset_csv(const Dataset& dataset, const std::filesystem::path& signals_csv,
                       const std::filesystem::path& topology_csv, const std::filesystem::path& lengths_csv) {
    {
        std::ofstream out(lengths_csv);
        if (!out) throw InputError("cannot write " + lengths_csv.string());
        out << "road_id,length_m\n";
        char buf[64];
        for (std::size_t r = 0; r < dataset.topology.roads; ++r) {
            std::snprintf(buf, sizeof(buf), "%.17g", dataset.topology.length_m[r]);
            out << dataset.road_ids[r] << ',' << buf << '\n';
        }
    }
    {
        std::ofstream out(topology_csv);
        if (!out) throw InputError("cannot write " + topology_csv.string());
        out << "road_a,road_b\n";
        for (const auto& [a, b] : dataset.topology.edges) out << a << ',' << b << '\n';
    }
    {
        std::ofstream out(signals_csv);
        if (!out) throw InputError("cannot write " + signals_csv.string());
        out << "timestamp,sensor_id,flow,occupancy,speed\n";
        char buf[64];
        for (std::size_t t = 0; t < dataset.tensor.timestamps(); ++t) {
            const std::string ts = format_hour_timestamp(dataset.start_hour + static_cast<std::int64_t>(t));
            for (std::size_t r = 0; r < dataset.tensor.roads(); ++r) {
                out << ts << ',' << dataset.road_ids[r];
                for (std::size_t s = 0; s < 3; ++s) {
                    std::snprintf(buf, sizeof(buf), "%.17g", dataset.tensor.at(t, r, s));
                    out << ',' << buf;
                }
                out << '\n';
            }
        }
    }
}

}  // namespace hgp
