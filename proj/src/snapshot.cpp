#include "nlsys/snapshot.hpp"

#include <array>
#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "nlsys/error.hpp"

namespace nlsys {

namespace {

constexpr std::array<char, 4> magic{'N', 'L', 'S', 'F'};

template <class T>
void put_le(std::ostream& out, T value) {
    std::array<unsigned char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
    std::array<unsigned char, sizeof(T)> bytes;
    if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T)))
        throw Error(ErrorKind::io, "truncated field snapshot");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

}  // namespace

void write_snapshot(std::ostream& out, const Field& f) {
    const auto& g = f.grid();
    out.write(magic.data(), magic.size());
    put_le<std::uint32_t>(out, snapshot_version);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.points));
    put_le<double>(out, g.extent);
    for (const auto& v : f.values()) {
        put_le<double>(out, v.real());
        put_le<double>(out, v.imag());
    }
    if (!out) throw Error(ErrorKind::io, "failed writing field snapshot");
}

Field read_snapshot(std::istream& in) {
    std::array<char, 4> head{};
    if (!in.read(head.data(), head.size()) || head != magic)
        throw Error(ErrorKind::io, "not a field snapshot (bad magic)");
    const auto version = get_le<std::uint32_t>(in);
    if (version != snapshot_version)
        throw Error(ErrorKind::io, "unsupported snapshot version " + std::to_string(version));
    GridSpec g;
    g.dim = static_cast<int>(get_le<std::uint32_t>(in));
    g.points = static_cast<int>(get_le<std::uint32_t>(in));
    g.extent = get_le<double>(in);
    try {
        g.validate();
    } catch (const Error& e) {
        throw Error(ErrorKind::io, std::string("snapshot header: ") + e.what());
    }
    std::vector<complex> values(g.size());
    for (auto& v : values) {
        const double re = get_le<double>(in);
        const double im = get_le<double>(in);
        v = complex(re, im);
    }
    return Field(g, std::move(values));
}

void write_snapshot(const std::filesystem::path& path, const Field& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
    write_snapshot(out, f);
}

Field read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
    return read_snapshot(in);
}

}  // namespace nlsys
