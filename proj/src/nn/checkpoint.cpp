#include "tnet/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace tnet::nn {

namespace {

constexpr char kMagic[8] = {'T', 'N', 'E', 'T', 'C', 'K', 'P', 'T'};

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_str(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
std::string read_str(std::istream& in) {
    std::uint32_t len = read_u32(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    return s;
}

std::ifstream open_and_verify(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    std::uint32_t version = read_u32(in);
    if (version != kCheckpointVersion)
        throw std::runtime_error("unsupported checkpoint version in " + path);
    return in;
}

} // namespace

void save_checkpoint(const std::string& path, const std::string& model_kind, std::uint64_t seed,
                     const ParamSet& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(kMagic, 8);
    write_u32(out, kCheckpointVersion);
    write_str(out, model_kind);
    write_u64(out, seed);
    write_u32(out, static_cast<std::uint32_t>(params.items().size()));
    for (const auto& [name, t] : params.items()) {
        write_str(out, name);
        write_u32(out, static_cast<std::uint32_t>(t.shape().size()));
        for (int d : t.shape()) write_u32(out, static_cast<std::uint32_t>(d));
        std::vector<float> vals(static_cast<size_t>(t.size()));
        for (Eigen::Index i = 0; i < t.size(); ++i) vals[static_cast<size_t>(i)] =
            static_cast<float>(t.value()[i]);
        out.write(reinterpret_cast<const char*>(vals.data()),
                  static_cast<std::streamsize>(vals.size() * sizeof(float)));
    }

    std::ofstream mf(path + ".manifest.txt", std::ios::binary);
    mf << "kind " << model_kind << "\nseed " << seed << "\n";
    for (const auto& [name, t] : params.items()) {
        mf << name << " (";
        for (size_t i = 0; i < t.shape().size(); ++i)
            mf << (i ? "x" : "") << t.shape()[i];
        mf << ") " << t.size() << "\n";
    }
    mf << "total " << params.total_count() << "\n";
}

std::uint64_t load_checkpoint(const std::string& path, const std::string& expected_kind,
                              ParamSet& params) {
    auto in = open_and_verify(path);
    std::string kind = read_str(in);
    if (kind != expected_kind)
        throw std::runtime_error("checkpoint kind mismatch: expected " + expected_kind +
                                 ", file holds " + kind);
    std::uint64_t seed = read_u64(in);
    std::uint32_t n = read_u32(in);
    if (n != params.items().size())
        throw std::runtime_error("checkpoint parameter count mismatch in " + path);
    for (std::uint32_t i = 0; i < n; ++i) {
        std::string name = read_str(in);
        std::uint32_t rank = read_u32(in);
        std::vector<int> shape(rank);
        for (auto& d : shape) d = static_cast<int>(read_u32(in));
        Tensor t = params.find(name); // throws on unknown name
        if (t.shape() != shape)
            throw std::runtime_error("checkpoint shape mismatch for parameter " + name);
        std::vector<float> vals(static_cast<size_t>(numel(shape)));
        in.read(reinterpret_cast<char*>(vals.data()),
                static_cast<std::streamsize>(vals.size() * sizeof(float)));
        if (!in) throw std::runtime_error("truncated checkpoint: " + path);
        for (Eigen::Index j = 0; j < t.size(); ++j)
            t.value()[j] = static_cast<double>(vals[static_cast<size_t>(j)]);
    }
    return seed;
}

std::string checkpoint_kind(const std::string& path) {
    auto in = open_and_verify(path);
    return read_str(in);
}

} // namespace tnet::nn
