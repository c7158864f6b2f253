#include "lobgeom/bookgeom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lobgeom {

const char* to_string(Side s) { return s == Side::bid ? "bid" : "ask"; }

Side side_from_string(const std::string& name) {
    if (name == "bid") return Side::bid;
    if (name == "ask") return Side::ask;
    throw DomainError("unknown side '" + name + "'");
}

BookSnapshot make_snapshot(std::int64_t timestamp, std::vector<Level> bids,
                           std::vector<Level> asks, double tick_size) {
    if (!(tick_size > 0.0) || !std::isfinite(tick_size)) {
        throw DomainError("make_snapshot: tick_size must be positive");
    }
    for (const auto& side : {bids, asks}) {
        for (const auto& l : side) {
            if (l.size < 0.0 || !std::isfinite(l.size) || !std::isfinite(l.price)) {
                throw DomainError("make_snapshot: sizes must be finite and >= 0");
            }
        }
    }
    for (std::size_t i = 1; i < bids.size(); ++i) {
        if (!(bids[i].price < bids[i - 1].price)) {
            throw DomainError("make_snapshot: bid prices must be strictly descending");
        }
    }
    for (std::size_t i = 1; i < asks.size(); ++i) {
        if (!(asks[i].price > asks[i - 1].price)) {
            throw DomainError("make_snapshot: ask prices must be strictly ascending");
        }
    }
    if (!bids.empty() && !asks.empty() && !(bids.front().price < asks.front().price)) {
        throw CrossedBook(timestamp, "crossed book at timestamp " +
                                         std::to_string(timestamp));
    }
    BookSnapshot snap;
    snap.timestamp = timestamp;
    snap.bids = std::move(bids);
    snap.asks = std::move(asks);
    snap.tick_size = tick_size;
    return snap;
}

double mid_price(const BookSnapshot& snap) {
    if (snap.bids.empty() || snap.asks.empty()) {
        throw EmptySide("mid_price: both sides must be nonempty");
    }
    return 0.5 * (snap.bids.front().price + snap.asks.front().price);
}

BookSnapshot projection_to_snapshot(const Projection& p, double tick_size,
                                    SizeRule rule,
                                    std::span<const long long> degrees,
                                    std::int64_t timestamp) {
    const std::size_t n = p.coords.size();
    if (rule == SizeRule::degree && degrees.size() != n) {
        throw DimensionMismatch(
            "projection_to_snapshot: degree rule needs one weight per vertex");
    }

    // Aggregate weights at distinct coordinate values.
    std::vector<std::pair<double, double>> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w =
            rule == SizeRule::unit ? 1.0 : static_cast<double>(degrees[i]);
        pts.emplace_back(p.coords[i], w);
    }
    std::sort(pts.begin(), pts.end());
    std::vector<std::pair<double, double>> distinct;
    for (const auto& [v, w] : pts) {
        if (!distinct.empty() && distinct.back().first == v) {
            distinct.back().second += w;
        } else {
            distinct.emplace_back(v, w);
        }
    }
    if (distinct.size() < 2) {
        throw DegenerateProjection(
            "projection_to_snapshot: all coordinates are equal");
    }

    // Signed-imbalance split over the gaps between distinct values; ties
    // resolve to the rightmost minimizing boundary.
    const double total = std::accumulate(
        distinct.begin(), distinct.end(), 0.0,
        [](double s, const auto& q) { return s + q.second; });
    double left = 0.0;
    double best_imb = std::numeric_limits<double>::infinity();
    std::size_t best_b = 0;
    for (std::size_t b = 0; b + 1 < distinct.size(); ++b) {
        left += distinct[b].second;
        const double imb = std::abs(left - (total - left));
        if (imb <= best_imb) {
            best_imb = imb;
            best_b = b;
        }
    }

    std::vector<Level> bids, asks;
    for (std::size_t i = 0; i <= best_b; ++i) {
        bids.push_back({distinct[i].first, distinct[i].second});
    }
    std::reverse(bids.begin(), bids.end());  // best bid first
    for (std::size_t i = best_b + 1; i < distinct.size(); ++i) {
        asks.push_back({distinct[i].first, distinct[i].second});
    }
    return make_snapshot(timestamp, std::move(bids), std::move(asks), tick_size);
}

SideProfile bin_side(const BookSnapshot& snap, Side side, int K) {
    if (K < 1) throw DomainError("bin_side: K must be >= 1");
    SideProfile prof;
    prof.side = side;
    prof.q.assign(static_cast<std::size_t>(K), 0.0);

    const auto& levels = side == Side::bid ? snap.bids : snap.asks;
    if (levels.empty()) return prof;

    const double mid = mid_price(snap);
    for (const auto& l : levels) {
        if (l.size <= 0.0) continue;
        const double ticks = std::abs(l.price - mid) / snap.tick_size;
        // Round-half-to-even via the default FP rounding mode.
        const double bin = std::nearbyint(ticks);
        if (bin < 1.0 || bin > static_cast<double>(K)) continue;
        prof.q[static_cast<std::size_t>(bin) - 1] += l.size;
    }
    return prof;
}

double auto_tick_size(const BookSnapshot& snap, int K) {
    if (K < 1) throw DomainError("auto_tick_size: K must be >= 1");
    const double mid = mid_price(snap);
    std::vector<double> dist;
    dist.reserve(snap.bids.size() + snap.asks.size());
    for (const auto& l : snap.bids) dist.push_back(mid - l.price);
    for (const auto& l : snap.asks) dist.push_back(l.price - mid);
    std::sort(dist.begin(), dist.end());
    const std::size_t idx = std::min(
        dist.size() - 1,
        static_cast<std::size_t>(0.90 * static_cast<double>(dist.size())));
    const double scale = dist[idx] > 0.0 ? dist[idx] : dist.back();
    if (!(scale > 0.0)) {
        throw DegenerateProjection("auto_tick_size: zero coordinate spread");
    }
    return scale / (2.0 * static_cast<double>(K));
}

CumulativeProfile cumulate(const SideProfile& q) {
    CumulativeProfile c;
    c.side = q.side;
    c.S.reserve(q.q.size());
    double run = 0.0;
    for (double v : q.q) {
        run += v;
        c.S.push_back(run);
    }
    return c;
}

CumulativeProfile window_average(std::span<const CumulativeProfile> profiles) {
    if (profiles.empty()) {
        throw DomainError("window_average: needs at least one profile");
    }
    const Side side = profiles.front().side;
    const std::size_t K = profiles.front().S.size();
    CumulativeProfile avg;
    avg.side = side;
    avg.S.assign(K, 0.0);
    for (const auto& p : profiles) {
        if (p.side != side) throw MixedSides("window_average: mixed sides");
        if (p.S.size() != K) throw MixedK("window_average: mixed K");
        for (std::size_t i = 0; i < K; ++i) avg.S[i] += p.S[i];
    }
    const double inv = 1.0 / static_cast<double>(profiles.size());
    for (double& v : avg.S) v *= inv;
    return avg;
}

CumulativeProfile window_average(std::initializer_list<CumulativeProfile> profiles) {
    return window_average(
        std::span<const CumulativeProfile>(profiles.begin(), profiles.size()));
}

std::vector<std::pair<int, int>> detect_plateau(const CumulativeProfile& Sbar,
                                                int min_run) {
    if (min_run < 1) throw DomainError("detect_plateau: min_run must be >= 1");
    std::vector<std::pair<int, int>> runs;
    const int K = static_cast<int>(Sbar.S.size());
    int start = -1;
    for (int i = 0; i < K; ++i) {
        const double inc = i == 0 ? Sbar.S[0] : Sbar.S[i] - Sbar.S[i - 1];
        if (inc == 0.0) {
            if (start < 0) start = i;
        } else if (start >= 0) {
            if (i - start >= min_run) runs.emplace_back(start, i - start);
            start = -1;
        }
    }
    if (start >= 0 && K - start >= min_run) runs.emplace_back(start, K - start);
    return runs;
}

}  // namespace lobgeom
