#pragma once

#include <cstddef>
#include <iterator>
#include <vector>

namespace captl {

using StateIndex = std::size_t;

/// A set of state indices over a fixed universe [0, universe). Iteration is ascending.
class StateSet {
public:
    class const_iterator {
    public:
        using iterator_category = std::forward_iterator_tag;
        using value_type = StateIndex;
        using difference_type = std::ptrdiff_t;
        using pointer = const StateIndex*;
        using reference = StateIndex;

        const_iterator() = default;
        const_iterator(const std::vector<bool>* bits, StateIndex pos) : bits_(bits), pos_(pos) { skip(); }

        StateIndex operator*() const { return pos_; }
        const_iterator& operator++() {
            ++pos_;
            skip();
            return *this;
        }
        const_iterator operator++(int) {
            auto copy = *this;
            ++*this;
            return copy;
        }
        bool operator==(const const_iterator& other) const { return pos_ == other.pos_; }

    private:
        void skip() {
            while (bits_ != nullptr && pos_ < bits_->size() && !(*bits_)[pos_]) ++pos_;
        }

        const std::vector<bool>* bits_ = nullptr;
        StateIndex pos_ = 0;
    };

    StateSet() = default;
    explicit StateSet(std::size_t universe) : bits_(universe, false) {}

    static StateSet full(std::size_t universe) {
        StateSet set;
        set.bits_.assign(universe, true);
        set.count_ = universe;
        return set;
    }

    std::size_t universe() const noexcept { return bits_.size(); }
    std::size_t size() const noexcept { return count_; }
    bool empty() const noexcept { return count_ == 0; }

    bool contains(StateIndex s) const { return s < bits_.size() && bits_[s]; }

    void insert(StateIndex s) {
        if (!bits_[s]) {
            bits_[s] = true;
            ++count_;
        }
    }

    void erase(StateIndex s) {
        if (bits_[s]) {
            bits_[s] = false;
            --count_;
        }
    }

    const_iterator begin() const { return {&bits_, 0}; }
    const_iterator end() const { return {&bits_, bits_.size()}; }

    std::vector<StateIndex> members() const { return {begin(), end()}; }

    StateSet& operator|=(const StateSet& other) {
        for (StateIndex s : other) insert(s);
        return *this;
    }

    StateSet& operator&=(const StateSet& other) {
        for (StateIndex s = 0; s < bits_.size(); ++s)
            if (bits_[s] && !other.contains(s)) erase(s);
        return *this;
    }

    StateSet& operator-=(const StateSet& other) {
        for (StateIndex s : other)
            if (s < bits_.size()) erase(s);
        return *this;
    }

    StateSet complement() const {
        StateSet result(bits_.size());
        for (StateIndex s = 0; s < bits_.size(); ++s)
            if (!bits_[s]) result.insert(s);
        return result;
    }

    bool is_subset_of(const StateSet& other) const {
        for (StateIndex s : *this)
            if (!other.contains(s)) return false;
        return true;
    }

    bool intersects(const StateSet& other) const {
        for (StateIndex s : *this)
            if (other.contains(s)) return true;
        return false;
    }

    friend bool operator==(const StateSet& a, const StateSet& b) { return a.bits_ == b.bits_; }

private:
    std::vector<bool> bits_;
    std::size_t count_ = 0;
};

inline StateSet operator|(StateSet a, const StateSet& b) { return a |= b; }
inline StateSet operator&(StateSet a, const StateSet& b) { return a &= b; }
inline StateSet operator-(StateSet a, const StateSet& b) { return a -= b; }

} // namespace captl
