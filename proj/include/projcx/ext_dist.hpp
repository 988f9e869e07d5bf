#pragma once

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>

namespace projcx {

/// Non-negative integer distance extended with a single infinite value.
/// Infinity absorbs addition and dominates every finite value.
class ExtDist {
public:
    ExtDist() = default;
    ExtDist(std::int64_t v) : value_(v) {
        if (v < 0) throw std::invalid_argument("ExtDist: negative value");
    }

    static ExtDist infinity() {
        ExtDist d;
        d.infinite_ = true;
        return d;
    }

    bool is_infinite() const { return infinite_; }
    bool is_finite() const { return !infinite_; }

    std::int64_t value() const {
        if (infinite_) throw std::logic_error("ExtDist: value() on infinity");
        return value_;
    }

    friend bool operator==(const ExtDist& a, const ExtDist& b) {
        if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
        return a.value_ == b.value_;
    }
    friend bool operator!=(const ExtDist& a, const ExtDist& b) { return !(a == b); }

    friend bool operator<(const ExtDist& a, const ExtDist& b) {
        if (a.infinite_) return false;
        if (b.infinite_) return true;
        return a.value_ < b.value_;
    }
    friend bool operator>(const ExtDist& a, const ExtDist& b) { return b < a; }
    friend bool operator<=(const ExtDist& a, const ExtDist& b) { return !(b < a); }
    friend bool operator>=(const ExtDist& a, const ExtDist& b) { return !(a < b); }

    friend ExtDist operator+(const ExtDist& a, const ExtDist& b) {
        if (a.infinite_ || b.infinite_) return infinity();
        return ExtDist(a.value_ + b.value_);
    }

    std::string str() const { return infinite_ ? "inf" : std::to_string(value_); }

    friend std::ostream& operator<<(std::ostream& os, const ExtDist& d) { return os << d.str(); }

private:
    std::int64_t value_ = 0;
    bool infinite_ = false;
};

inline ExtDist max(const ExtDist& a, const ExtDist& b) { return a < b ? b : a; }
inline ExtDist min(const ExtDist& a, const ExtDist& b) { return a < b ? a : b; }

}  // namespace projcx
