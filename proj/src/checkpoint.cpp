#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "frostnet/model.hpp"

namespace frostnet {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'F', 'R', 'O', 'S', 'T', 'N', 'E', 'T'};
constexpr char kEndMarker[4] = {'E', 'N', 'D', '.'};
constexpr std::size_t kMaxElements = std::size_t{1} << 31;

using json = nlohmann::json;

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    template <typename T>
    void put(T value) {
        out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
    }
    void bytes(const char* data, std::size_t n) { out_.write(data, static_cast<std::streamsize>(n)); }
    void array(const std::string& name, const NumericArray& a) {
        put<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
        bytes(name.data(), name.size());
        put<std::uint32_t>(static_cast<std::uint32_t>(a.rank()));
        for (std::size_t d : a.shape()) put<std::uint64_t>(d);
        bytes(reinterpret_cast<const char*>(a.data()), a.size() * sizeof(double));
    }
    void finish(const std::filesystem::path& path) {
        out_.flush();
        if (!out_) throw std::runtime_error("write failed for " + path.string());
    }

private:
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_) throw std::runtime_error("cannot open checkpoint " + path.string());
    }
    void bytes(char* dst, std::size_t n) {
        in_.read(dst, static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n)
            throw std::runtime_error("checkpoint " + path_.string() + " is truncated");
    }
    template <typename T>
    T get() {
        T value;
        bytes(reinterpret_cast<char*>(&value), sizeof(T));
        return value;
    }
    std::string string(std::size_t n, std::size_t limit) {
        if (n > limit) throw std::runtime_error("checkpoint " + path_.string() + " is corrupt");
        std::string s(n, '\0');
        bytes(s.data(), n);
        return s;
    }
    bool at_eof() { return in_.peek() == std::char_traits<char>::eof(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ifstream in_;
};

template <typename Params>
auto state_slots(Params& params) {
    using Ptr = decltype(params.named_parameters().front().second);
    std::map<std::string, Ptr> slots;
    for (auto& [name, ptr] : params.named_parameters()) slots[name] = ptr;
    for (std::size_t b = 0; b < params.blocks.size(); ++b) {
        const std::string prefix = "block" + std::to_string(b) + ".";
        slots[prefix + "running_mean"] = &params.blocks[b].running.mean;
        slots[prefix + "running_var"] = &params.blocks[b].running.var;
    }
    return slots;
}

}  // namespace

std::string architecture_to_json(const ArchitectureConfig& config) {
    json j = {{"input_length", config.input_length},
              {"conv_filters", config.conv_filters},
              {"conv_kernel", config.conv_kernel},
              {"pool_windows", config.pool_windows},
              {"num_classes", config.num_classes}};
    return j.dump();
}

ArchitectureConfig architecture_from_json(const std::string& text) {
    const json j = json::parse(text);
    ArchitectureConfig config;
    config.input_length = j.at("input_length").get<std::size_t>();
    config.conv_filters = j.at("conv_filters").get<std::vector<std::size_t>>();
    config.conv_kernel = j.at("conv_kernel").get<std::size_t>();
    config.pool_windows = j.at("pool_windows").get<std::vector<std::size_t>>();
    config.num_classes = j.at("num_classes").get<std::size_t>();
    return config;
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path,
                     const Attachments& attachments) {
    const auto slots = state_slots(params);
    for (const auto& [name, _] : attachments)
        if (slots.count(name))
            throw std::invalid_argument("attachment name '" + name + "' collides with a parameter");

    Writer w(path);
    w.bytes(kMagic, sizeof kMagic);
    w.put<std::uint32_t>(kCheckpointVersion);
    const std::string header = architecture_to_json(params.config);
    w.put<std::uint64_t>(header.size());
    w.bytes(header.data(), header.size());
    w.put<std::uint64_t>(slots.size() + attachments.size());
    for (const auto& [name, ptr] : slots) w.array(name, *ptr);
    for (const auto& [name, array] : attachments) w.array(name, array);
    w.bytes(kEndMarker, sizeof kEndMarker);
    w.finish(path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    Reader r(path);
    char magic[sizeof kMagic];
    r.bytes(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error(path.string() + " is not a frostnet checkpoint");
    const auto version = r.get<std::uint32_t>();
    if (version != kCheckpointVersion)
        throw std::runtime_error("checkpoint " + path.string() + " has format version " +
                                 std::to_string(version) + ", expected " +
                                 std::to_string(kCheckpointVersion));

    const std::string header = r.string(r.get<std::uint64_t>(), 1 << 16);
    ArchitectureConfig config;
    try {
        config = architecture_from_json(header);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("checkpoint " + path.string() + " has a bad header: " + e.what());
    }

    Checkpoint ckpt{build_model(config, 0), {}};
    auto slots = state_slots(ckpt.model);
    std::map<std::string, bool> seen;

    const auto count = r.get<std::uint64_t>();
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::string name = r.string(r.get<std::uint32_t>(), 4096);
        const auto rank = r.get<std::uint32_t>();
        if (rank == 0 || rank > 8)
            throw std::runtime_error("checkpoint array '" + name + "' has rank " +
                                     std::to_string(rank));
        Shape shape(rank);
        std::size_t elements = 1;
        for (auto& d : shape) {
            d = static_cast<std::size_t>(r.get<std::uint64_t>());
            if (d == 0 || d > kMaxElements / elements)
                throw std::runtime_error("checkpoint array '" + name + "' has a bad dimension");
            elements *= d;
        }
        NumericArray array(shape);
        r.bytes(reinterpret_cast<char*>(array.data()), array.size() * sizeof(double));

        auto slot = slots.find(name);
        if (slot == slots.end()) {
            ckpt.attachments[name] = std::move(array);
            continue;
        }
        if (slot->second->shape() != shape)
            throw std::runtime_error("checkpoint array '" + name + "' has shape " +
                                     shape_to_string(shape) + ", architecture requires " +
                                     shape_to_string(slot->second->shape()));
        *slot->second = std::move(array);
        seen[name] = true;
    }
    for (const auto& [name, _] : slots)
        if (!seen.count(name))
            throw std::runtime_error("checkpoint " + path.string() + " is missing '" + name + "'");

    char end[sizeof kEndMarker];
    r.bytes(end, sizeof end);
    if (std::memcmp(end, kEndMarker, sizeof kEndMarker) != 0 || !r.at_eof())
        throw std::runtime_error("checkpoint " + path.string() + " has trailing or corrupt data");
    return ckpt;
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
    return read_checkpoint(path).model;
}

ModelParams load_checkpoint(const std::filesystem::path& path, const ArchitectureConfig& expected) {
    ModelParams params = load_checkpoint(path);
    if (!(params.config == expected))
        throw std::runtime_error("checkpoint " + path.string() + " was saved for architecture " +
                                 architecture_to_json(params.config) + ", expected " +
                                 architecture_to_json(expected));
    return params;
}

}  // namespace frostnet
