#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ext_dist.hpp"
#include "parallel.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "system.hpp"

namespace projcx {

/// Controls for the verifiers.  Exhaustive scans are the default; systems
/// with more than `exhaustive_max_n` spaces switch to seeded sampling, which
/// is labeled in the report and requires an explicit seed.
struct VerifyOptions {
    int workers = 0;  // 0 = PROJCX_WORKERS or 1
    int exhaustive_max_n = 60;
    std::int64_t sample_count = 100000;
    std::optional<std::uint64_t> seed;
};

inline ExtDist projection_distance(const ProjectionSystem& sys, SpaceId Y, SpaceId X, SpaceId Z) {
    return sys.d(Y, X, Z);
}

namespace detail {

struct SampledTuple {
    int y, x, z, w;  // x, z, w != y; x != z
};

inline std::vector<SampledTuple> make_sample(const DistanceView& v, const VerifyOptions& opts) {
    if (!opts.seed)
        throw std::invalid_argument("verification: system exceeds the exhaustive size limit; sampling requires a seed");
    Rng rng(*opts.seed);
    int n = v.n();
    std::vector<SampledTuple> out;
    out.reserve(static_cast<std::size_t>(opts.sample_count));
    for (std::int64_t i = 0; i < opts.sample_count; ++i) {
        SampledTuple t{};
        t.y = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        do {
            t.x = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        } while (t.x == t.y);
        do {
            t.z = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        } while (t.z == t.y || t.z == t.x);
        do {
            t.w = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        } while (t.w == t.y);
        out.push_back(t);
    }
    return out;
}

inline std::string dname(const DistanceView& v, int y, int x, int z) {
    return "d_" + std::to_string(v.id_at(y)) + "(" + std::to_string(v.id_at(x)) + ", " + std::to_string(v.id_at(z)) +
           ")";
}

struct MaybeTheta {
    bool has_value = false;
    std::int64_t value = 0;
};

}  // namespace detail

/// Smallest theta for which (P0)-(P4) hold, as a raw scan.  Returns
/// no-value when the theta-free axioms fail or an INF value forces failure.
inline detail::MaybeTheta infer_theta_value(const DistanceView& v) {
    const int n = v.n();
    std::int64_t best = 0;
    // (P3)/(P4) admit no theta at all if violated
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            if (x == y) continue;
            for (int z = 0; z < n; ++z) {
                if (z == y) continue;
                if (v.d_idx(y, x, z) != v.d_idx(y, z, x)) return {};
                for (int w = 0; w < n; ++w) {
                    if (w == y) continue;
                    if (v.d_idx(y, x, z) + v.d_idx(y, z, w) < v.d_idx(y, x, w)) return {};
                }
            }
        }
    // (P0): diagonals
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            if (x == y) continue;
            ExtDist dxx = v.d_idx(y, x, x);
            if (dxx.is_infinite()) return {};
            best = std::max(best, dxx.value());
        }
    // (P1): theta must dominate min(d_Y(X,Z), d_X(Y,Z)) on every distinct triple
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            if (x == y) continue;
            for (int z = 0; z < n; ++z) {
                if (z == y || z == x) continue;
                ExtDist m = min(v.d_idx(y, x, z), v.d_idx(x, y, z));
                if (m.is_infinite()) return {};
                best = std::max(best, m.value());
            }
        }
    return {true, best};
}

inline std::optional<std::int64_t> infer_theta(const DistanceView& v) {
    auto t = infer_theta_value(v);
    if (!t.has_value) return std::nullopt;
    return t.value;
}

/// Smallest theta for which (SP1)-(SP5) hold; no-value when none exists.
inline std::optional<std::int64_t> infer_theta_strong(const DistanceView& v) {
    const int n = v.n();
    std::int64_t best = 0;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            if (x == y) continue;
            for (int z = 0; z < n; ++z) {
                if (z == y) continue;
                if (v.d_idx(y, x, z) != v.d_idx(y, z, x)) return std::nullopt;  // (SP1)
                for (int w = 0; w < n; ++w) {
                    if (w == y) continue;
                    if (v.d_idx(y, x, z) + v.d_idx(y, z, w) < v.d_idx(y, x, w)) return std::nullopt;  // (SP2)
                }
            }
        }
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            if (x == y) continue;
            ExtDist dxx = v.d_idx(y, x, x);
            if (dxx.is_infinite()) return std::nullopt;  // (SP4)
            best = std::max(best, dxx.value());
        }
    // (SP3): whenever some W separates d_Z(X,.) from d_Z(Y,.), theta must
    // cover the hypothesis d_Y(X,Z)
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            if (x == y) continue;
            for (int z = 0; z < n; ++z) {
                if (z == y || z == x) continue;
                bool separated = false;
                for (int w = 0; w < n && !separated; ++w) {
                    if (w == z) continue;
                    if (v.d_idx(z, x, w) != v.d_idx(z, y, w)) separated = true;
                }
                if (separated) {
                    ExtDist h = v.d_idx(y, x, z);
                    if (h.is_infinite()) return std::nullopt;
                    best = std::max(best, h.value());
                }
            }
        }
    return best;
}

/// Checks the weak projection axioms (P0)-(P4).  (P2) cannot fail on a
/// finite family; the report records the largest far-set size instead.
inline AxiomReport verify_weak_axioms(const DistanceView& v, std::int64_t theta, const VerifyOptions& opts = {}) {
    AxiomReport rep;
    rep.check = "verify_weak_axioms";
    const ExtDist th(theta);
    const int n = v.n();

    struct Partial {
        ViolationBuffer viol;
        std::int64_t p0 = 0, p1 = 0, p1_hyp = 0, p3 = 0, p4 = 0, max_far = 0;
    };

    auto check_p0 = [&](Partial& p, int y, int x) {
        p.p0++;
        ExtDist dxx = v.d_idx(y, x, x);
        if (!(dxx <= th))
            p.viol.add({"P0",
                              {v.id_at(y), v.id_at(x)},
                              {dxx},
                              detail::dname(v, y, x, x) + " = " + dxx.str() + " exceeds theta = " +
                                  std::to_string(theta)});
    };
    auto check_p1 = [&](Partial& p, int y, int x, int z) {
        p.p1++;
        ExtDist a = v.d_idx(y, x, z);
        if (a > th) {
            p.p1_hyp++;
            ExtDist b = v.d_idx(x, y, z);
            if (!(b <= th))
                p.viol.add({"P1",
                                  {v.id_at(y), v.id_at(x), v.id_at(z)},
                                  {a, b},
                                  detail::dname(v, y, x, z) + " = " + a.str() + " > theta but " +
                                      detail::dname(v, x, y, z) + " = " + b.str()});
        }
    };
    auto check_p3 = [&](Partial& p, int y, int x, int z) {
        p.p3++;
        ExtDist a = v.d_idx(y, x, z), b = v.d_idx(y, z, x);
        if (a != b)
            p.viol.add({"P3",
                              {v.id_at(y), v.id_at(x), v.id_at(z)},
                              {a, b},
                              detail::dname(v, y, x, z) + " != " + detail::dname(v, y, z, x)});
    };
    auto check_p4 = [&](Partial& p, int y, int x, int z, int w) {
        p.p4++;
        ExtDist lhs = v.d_idx(y, x, z) + v.d_idx(y, z, w);
        ExtDist rhs = v.d_idx(y, x, w);
        if (lhs < rhs)
            p.viol.add({"P4",
                              {v.id_at(y), v.id_at(x), v.id_at(z), v.id_at(w)},
                              {v.d_idx(y, x, z), v.d_idx(y, z, w), rhs},
                              detail::dname(v, y, x, z) + " + " + detail::dname(v, y, z, w) + " < " +
                                  detail::dname(v, y, x, w)});
    };
    auto far_count = [&](int x, int z) {
        std::int64_t c = 0;
        for (int w = 0; w < n; ++w)
            if (w != x && w != z && v.d_idx(w, x, z) > th) ++c;
        return c;
    };

    bool sampled = n > opts.exhaustive_max_n;
    auto merge = [&](Partial& p) {
        rep.add_violations_block(std::move(p.viol.stored), p.viol.total);
        rep.bump("p0_checked", p.p0);
        rep.bump("p1_checked", p.p1);
        rep.bump("p1_hypotheses", p.p1_hyp);
        rep.bump("p3_checked", p.p3);
        rep.bump("p4_checked", p.p4);
        auto it = rep.counts.find("p2_max_far");
        if (it == rep.counts.end() || it->second < p.max_far) rep.counts["p2_max_far"] = p.max_far;
    };

    if (!sampled) {
        parallel_chunks<Partial>(
            static_cast<std::size_t>(n), resolve_workers(opts.workers),
            [&](std::size_t, std::size_t begin, std::size_t end) {
                Partial p;
                for (int y = static_cast<int>(begin); y < static_cast<int>(end); ++y) {
                    for (int x = 0; x < n; ++x) {
                        if (x == y) continue;
                        check_p0(p, y, x);
                        for (int z = 0; z < n; ++z) {
                            if (z == y || z == x) continue;
                            check_p1(p, y, x, z);
                            if (x < z) {
                                check_p3(p, y, x, z);
                                p.max_far = std::max(p.max_far, far_count(x, z));
                            }
                        }
                        for (int z = 0; z < n; ++z) {
                            if (z == y) continue;
                            for (int w = 0; w < n; ++w) {
                                if (w == y) continue;
                                check_p4(p, y, x, z, w);
                            }
                        }
                    }
                }
                return p;
            },
            merge);
        rep.counts["p2_max_far"] += 0;  // ensure the key exists even for n < 3
        if (auto t = infer_theta_value(v); t.has_value)
            rep.inferred_theta = t.value;
        else
            rep.inferred_theta_none = true;
    } else {
        auto tuples = detail::make_sample(v, opts);
        rep.mode = "sampled";
        rep.seed = opts.seed;
        rep.note("sampled verification over " + std::to_string(tuples.size()) +
                 " tuples; not exhaustive, no theta inference");
        parallel_chunks<Partial>(
            tuples.size(), resolve_workers(opts.workers),
            [&](std::size_t, std::size_t begin, std::size_t end) {
                Partial p;
                for (std::size_t i = begin; i < end; ++i) {
                    const auto& t = tuples[i];
                    check_p0(p, t.y, t.x);
                    check_p1(p, t.y, t.x, t.z);
                    check_p3(p, t.y, t.x, t.z);
                    check_p4(p, t.y, t.x, t.z, t.w);
                    p.max_far = std::max(p.max_far, far_count(t.x, t.z));
                }
                return p;
            },
            merge);
    }
    return rep;
}

/// Checks the strong axioms (SP1)-(SP5); (SP3) is exact equality over every
/// admissible W.  (SP5) is recorded as the largest far-set size.
inline AxiomReport verify_strong_axioms(const DistanceView& v, std::int64_t theta, const VerifyOptions& opts = {}) {
    AxiomReport rep;
    rep.check = "verify_strong_axioms";
    const ExtDist th(theta);
    const int n = v.n();

    struct Partial {
        ViolationBuffer viol;
        std::int64_t sp1 = 0, sp2 = 0, sp3 = 0, sp3_hyp = 0, sp4 = 0, max_far = 0;
    };

    auto check_sp1 = [&](Partial& p, int y, int x, int z) {
        p.sp1++;
        ExtDist a = v.d_idx(y, x, z), b = v.d_idx(y, z, x);
        if (a != b)
            p.viol.add({"SP1",
                              {v.id_at(y), v.id_at(x), v.id_at(z)},
                              {a, b},
                              detail::dname(v, y, x, z) + " != " + detail::dname(v, y, z, x)});
    };
    auto check_sp2 = [&](Partial& p, int y, int x, int z, int w) {
        p.sp2++;
        if (v.d_idx(y, x, z) + v.d_idx(y, z, w) < v.d_idx(y, x, w))
            p.viol.add({"SP2",
                              {v.id_at(y), v.id_at(x), v.id_at(z), v.id_at(w)},
                              {v.d_idx(y, x, z), v.d_idx(y, z, w), v.d_idx(y, x, w)},
                              detail::dname(v, y, x, z) + " + " + detail::dname(v, y, z, w) + " < " +
                                  detail::dname(v, y, x, w)});
    };
    auto check_sp3 = [&](Partial& p, int y, int x, int z) {
        p.sp3++;
        ExtDist h = v.d_idx(y, x, z);
        if (!(h > th)) return;
        p.sp3_hyp++;
        for (int w = 0; w < n; ++w) {
            if (w == z) continue;
            ExtDist a = v.d_idx(z, x, w), b = v.d_idx(z, y, w);
            if (a != b)
                p.viol.add({"SP3",
                                  {v.id_at(y), v.id_at(x), v.id_at(z), v.id_at(w)},
                                  {h, a, b},
                                  detail::dname(v, y, x, z) + " = " + h.str() + " > theta yet " +
                                      detail::dname(v, z, x, w) + " = " + a.str() + " != " +
                                      detail::dname(v, z, y, w) + " = " + b.str()});
        }
    };
    auto check_sp4 = [&](Partial& p, int y, int x) {
        p.sp4++;
        ExtDist dxx = v.d_idx(y, x, x);
        if (!(dxx <= th))
            p.viol.add({"SP4",
                              {v.id_at(y), v.id_at(x)},
                              {dxx},
                              detail::dname(v, y, x, x) + " = " + dxx.str() + " exceeds theta = " +
                                  std::to_string(theta)});
    };
    auto far_count = [&](int x, int z) {
        std::int64_t c = 0;
        for (int w = 0; w < n; ++w)
            if (w != x && w != z && v.d_idx(w, x, z) > th) ++c;
        return c;
    };

    auto merge = [&](Partial& p) {
        rep.add_violations_block(std::move(p.viol.stored), p.viol.total);
        rep.bump("sp1_checked", p.sp1);
        rep.bump("sp2_checked", p.sp2);
        rep.bump("sp3_checked", p.sp3);
        rep.bump("sp3_hypotheses", p.sp3_hyp);
        rep.bump("sp4_checked", p.sp4);
        auto it = rep.counts.find("sp5_max_count");
        if (it == rep.counts.end() || it->second < p.max_far) rep.counts["sp5_max_count"] = p.max_far;
    };

    bool sampled = n > opts.exhaustive_max_n;
    if (!sampled) {
        parallel_chunks<Partial>(
            static_cast<std::size_t>(n), resolve_workers(opts.workers),
            [&](std::size_t, std::size_t begin, std::size_t end) {
                Partial p;
                for (int y = static_cast<int>(begin); y < static_cast<int>(end); ++y) {
                    for (int x = 0; x < n; ++x) {
                        if (x == y) continue;
                        check_sp4(p, y, x);
                        for (int z = 0; z < n; ++z) {
                            if (z == y || z == x) continue;
                            check_sp3(p, y, x, z);
                            if (x < z) {
                                check_sp1(p, y, x, z);
                                p.max_far = std::max(p.max_far, far_count(x, z));
                            }
                        }
                        for (int z = 0; z < n; ++z) {
                            if (z == y) continue;
                            for (int w = 0; w < n; ++w) {
                                if (w == y) continue;
                                check_sp2(p, y, x, z, w);
                            }
                        }
                    }
                }
                return p;
            },
            merge);
        rep.counts["sp5_max_count"] += 0;
        if (auto t = infer_theta_strong(v))
            rep.inferred_theta = *t;
        else
            rep.inferred_theta_none = true;
    } else {
        auto tuples = detail::make_sample(v, opts);
        rep.mode = "sampled";
        rep.seed = opts.seed;
        rep.note("sampled verification over " + std::to_string(tuples.size()) +
                 " tuples; not exhaustive, no theta inference");
        parallel_chunks<Partial>(
            tuples.size(), resolve_workers(opts.workers),
            [&](std::size_t, std::size_t begin, std::size_t end) {
                Partial p;
                for (std::size_t i = begin; i < end; ++i) {
                    const auto& t = tuples[i];
                    check_sp4(p, t.y, t.x);
                    check_sp1(p, t.y, t.x, t.z);
                    check_sp3(p, t.y, t.x, t.z);
                    check_sp2(p, t.y, t.x, t.z, t.w);
                    p.max_far = std::max(p.max_far, far_count(t.x, t.z));
                }
                return p;
            },
            merge);
    }
    return rep;
}

/// min(d_Y(X,Z), d_Z(X,Y)) <= theta over all distinct triples; implied by
/// the strong axioms.
inline AxiomReport triples_check(const DistanceView& v, std::int64_t theta) {
    AxiomReport rep;
    rep.check = "triples_check";
    const ExtDist th(theta);
    const int n = v.n();
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            if (y == x) continue;
            for (int z = y + 1; z < n; ++z) {
                if (z == x) continue;
                rep.bump("triples_checked");
                ExtDist m = min(v.d_idx(y, x, z), v.d_idx(z, x, y));
                if (!(m <= th))
                    rep.add_violation({"triples",
                                       {v.id_at(x), v.id_at(y), v.id_at(z)},
                                       {v.d_idx(y, x, z), v.d_idx(z, x, y)},
                                       "min(" + detail::dname(v, y, x, z) + ", " + detail::dname(v, z, x, y) +
                                           ") = " + m.str() + " exceeds theta = " + std::to_string(theta)});
            }
        }
    if (n < 3) rep.note("vacuous: fewer than three spaces");
    return rep;
}

}  // namespace projcx
