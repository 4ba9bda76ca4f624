#pragma once

#include <cstddef>

namespace nlsys::detail {

/// Pairwise reduction of term(i) for i in [begin, end). The tree shape depends
/// only on the range, so results are reproducible bit for bit.
template <class Term>
double pairwise_reduce(std::size_t begin, std::size_t end, const Term& term) {
    constexpr std::size_t block = 64;
    if (end - begin <= block) {
        double acc = 0.0;
        for (std::size_t i = begin; i < end; ++i) acc += term(i);
        return acc;
    }
    const std::size_t mid = begin + (end - begin) / 2;
    return pairwise_reduce(begin, mid, term) + pairwise_reduce(mid, end, term);
}

template <class Term>
double pairwise_reduce(std::size_t count, const Term& term) {
    return pairwise_reduce(std::size_t{0}, count, term);
}

}  // namespace nlsys::detail
