#pragma once

// Order-book observables: snapshots, mid, tick binning, cumulative liquidity,
// window averages, plateau detection.

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lobgeom/errors.hpp"
#include "lobgeom/spectral.hpp"

namespace lobgeom {

enum class Side { bid, ask };

const char* to_string(Side s);
Side side_from_string(const std::string& name);

struct Level {
    double price = 0.0;
    double size = 0.0;
};

// One observation instant after venue aggregation. Bids strictly descending,
// asks strictly ascending, best bid < best ask. Zero-size levels are allowed
// and carry no liquidity.
struct BookSnapshot {
    std::int64_t timestamp = 0;
    std::vector<Level> bids;
    std::vector<Level> asks;
    double tick_size = 0.0;
};

// Validating constructor; bids/asks given best-first.
BookSnapshot make_snapshot(std::int64_t timestamp, std::vector<Level> bids,
                           std::vector<Level> asks, double tick_size);

// Midpoint of best bid and best ask.
double mid_price(const BookSnapshot& snap);

enum class SizeRule { unit, degree };

// Builds a synthetic snapshot from projected coordinates. The boundary between
// the two sides is the signed-imbalance split over candidate gaps between
// distinct coordinate values (ties resolve to the rightmost minimizer); the
// mid is the midpoint of the two coordinates bracketing that split. Under the
// degree rule each vertex contributes its degree as size, so `degrees` must
// cover the vertex set.
BookSnapshot projection_to_snapshot(const Projection& p, double tick_size,
                                    SizeRule rule,
                                    std::span<const long long> degrees = {},
                                    std::int64_t timestamp = 0);

struct SideProfile {
    Side side = Side::bid;
    std::vector<double> q;  // indexed by tick bin 1..K at offsets 0..K-1
};

struct CumulativeProfile {
    Side side = Side::bid;
    std::vector<double> S;
};

// Bins one side by rounded tick distance from the mid (round-half-to-even).
// Levels landing at bin 0 or beyond K are discarded; zero sizes are ignored.
// An empty side yields an all-zero profile.
SideProfile bin_side(const BookSnapshot& snap, Side side, int K);

// Tick size for synthetic books without an instrument tick: the K-bin window
// covers the inner half of the visible one-sided mass (90th percentile of
// distance-from-mid mapped to bin 2K), which resolves the near-mid region the
// profile models describe.
double auto_tick_size(const BookSnapshot& snap, int K);

CumulativeProfile cumulate(const SideProfile& q);

// Element-wise mean of cumulative profiles sharing a side and K.
CumulativeProfile window_average(std::span<const CumulativeProfile> profiles);
CumulativeProfile window_average(std::initializer_list<CumulativeProfile> profiles);

// Maximal runs of consecutive zero increments with length >= min_run, as
// (start index into S, run length). The first bin's increment is S[0] itself.
std::vector<std::pair<int, int>> detect_plateau(const CumulativeProfile& Sbar,
                                                int min_run);

}  // namespace lobgeom
