#include "gmlm/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "binary tensor IO assumes a little-endian host");

namespace gmlm {

namespace {

constexpr char kTenMagic[6] = {'G', 'T', 'E', 'N', '1', '\0'};
constexpr char kDsMagic[6] = {'G', 'T', 'D', 'S', '1', '\0'};

void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw std::runtime_error("tensor IO: truncated stream");
    return v;
}

void write_header(std::ostream& os, const char (&magic)[6], const std::vector<std::size_t>& dims) {
    os.write(magic, sizeof magic);
    const std::uint8_t order = static_cast<std::uint8_t>(dims.size());
    os.write(reinterpret_cast<const char*>(&order), 1);
    for (std::size_t d : dims) write_u64(os, d);
}

std::vector<std::size_t> read_dims(std::istream& is) {
    std::uint8_t order = 0;
    is.read(reinterpret_cast<char*>(&order), 1);
    if (!is || order == 0) throw std::runtime_error("tensor IO: bad order byte");
    std::vector<std::size_t> dims(order);
    for (auto& d : dims) d = static_cast<std::size_t>(read_u64(is));
    return dims;
}

void check_magic(std::istream& is, const char (&magic)[6]) {
    char buf[6] = {};
    is.read(buf, sizeof buf);
    if (!is || std::memcmp(buf, magic, sizeof buf) != 0)
        throw std::runtime_error("tensor IO: bad magic");
}

void write_values(std::ostream& os, const Tensor& t) {
    os.write(reinterpret_cast<const char*>(t.vec().data()),
             static_cast<std::streamsize>(t.size() * sizeof(double)));
}

void read_values(std::istream& is, Tensor& t) {
    is.read(reinterpret_cast<char*>(t.vec().data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!is) throw std::runtime_error("tensor IO: truncated values");
}

}  // namespace

void write_gten(std::ostream& os, const Tensor& t) {
    write_header(os, kTenMagic, t.dims());
    write_values(os, t);
}

Tensor read_gten(std::istream& is) {
    check_magic(is, kTenMagic);
    Tensor t(read_dims(is));
    read_values(is, t);
    return t;
}

void write_gtds(std::ostream& os, const std::vector<Tensor>& ts) {
    if (ts.empty()) throw std::invalid_argument("write_gtds: empty dataset");
    for (const Tensor& t : ts)
        if (!t.same_dims(ts.front()))
            throw std::invalid_argument("write_gtds: inconsistent tensor dims");
    os.write(kDsMagic, sizeof kDsMagic);
    write_u64(os, ts.size());
    const std::uint8_t order = static_cast<std::uint8_t>(ts.front().order());
    os.write(reinterpret_cast<const char*>(&order), 1);
    for (std::size_t d : ts.front().dims()) write_u64(os, d);
    for (const Tensor& t : ts) write_values(os, t);
}

std::vector<Tensor> read_gtds(std::istream& is) {
    check_magic(is, kDsMagic);
    const std::uint64_t n = read_u64(is);
    if (n == 0) throw std::runtime_error("read_gtds: empty dataset");
    const std::vector<std::size_t> dims = read_dims(is);
    std::vector<Tensor> ts;
    ts.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        Tensor t(dims);
        read_values(is, t);
        ts.push_back(std::move(t));
    }
    return ts;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("tensor IO: cannot open for writing: " + path);
    return os;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("tensor IO: cannot open for reading: " + path);
    return is;
}

}  // namespace

void write_gten_file(const std::string& path, const Tensor& t) {
    auto os = open_out(path);
    write_gten(os, t);
}

Tensor read_gten_file(const std::string& path) {
    auto is = open_in(path);
    return read_gten(is);
}

void write_gtds_file(const std::string& path, const std::vector<Tensor>& ts) {
    auto os = open_out(path);
    write_gtds(os, ts);
}

std::vector<Tensor> read_gtds_file(const std::string& path) {
    auto is = open_in(path);
    return read_gtds(is);
}

}  // namespace gmlm
