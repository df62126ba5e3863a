#include "nsrkit/engine/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace nsr {

namespace {

constexpr char kMagic[8] = {'N', 'S', 'R', 'K', 'C', 'K', 'P', 'T'};

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void bytes(const void* p, std::size_t n) {
        auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}
    void need(std::size_t n) const {
        if (pos_ + n > in_.size()) throw std::runtime_error("checkpoint: truncated data");
    }
    std::uint8_t u8() {
        need(1);
        return in_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(in_[pos_++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(in_[pos_++]) << (8 * i);
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    std::string str(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == in_.size(); }

private:
    const std::vector<std::uint8_t>& in_;
    std::size_t pos_ = 0;
};

}  // namespace

const NamedTensor* Checkpoint::find(const std::string& name) const {
    auto it = std::find_if(tensors.begin(), tensors.end(), [&](const NamedTensor& t) { return t.name == name; });
    return it == tensors.end() ? nullptr : &*it;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
    Writer w;
    w.bytes(kMagic, sizeof kMagic);
    w.u32(ckpt.version);
    w.u64(ckpt.metadata.size());
    w.bytes(ckpt.metadata.data(), ckpt.metadata.size());
    w.u32(static_cast<std::uint32_t>(ckpt.tensors.size()));
    for (const auto& t : ckpt.tensors) {
        if (shape_numel(t.shape) != t.values.size()) {
            throw std::invalid_argument("checkpoint: tensor '" + t.name + "' shape " + shape_str(t.shape) +
                                        " does not match its " + std::to_string(t.values.size()) + " values");
        }
        w.u32(static_cast<std::uint32_t>(t.name.size()));
        w.bytes(t.name.data(), t.name.size());
        w.u8(t.frozen ? 1 : 0);
        w.u32(static_cast<std::uint32_t>(t.shape.size()));
        for (auto d : t.shape) w.u64(d);
        for (float v : t.values) w.f32(v);
    }
    return w.take();
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes);
    if (r.str(sizeof kMagic) != std::string(kMagic, sizeof kMagic)) {
        throw std::runtime_error("checkpoint: bad magic, not an nsrkit checkpoint");
    }
    Checkpoint ckpt;
    ckpt.version = r.u32();
    if (ckpt.version != kCheckpointVersion) {
        throw std::runtime_error("checkpoint: unsupported format version " + std::to_string(ckpt.version));
    }
    ckpt.metadata = r.str(r.u64());
    const std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        NamedTensor t;
        t.name = r.str(r.u32());
        t.frozen = r.u8() != 0;
        const std::uint32_t rank = r.u32();
        for (std::uint32_t k = 0; k < rank; ++k) t.shape.push_back(r.u64());
        const std::size_t n = shape_numel(t.shape);
        r.need(n * 4);
        t.values.resize(n);
        for (auto& v : t.values) v = r.f32();
        ckpt.tensors.push_back(std::move(t));
    }
    if (!r.done()) throw std::runtime_error("checkpoint: trailing bytes after last tensor");
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    const auto bytes = encode_checkpoint(ckpt);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("checkpoint: cannot open " + tmp.string() + " for writing");
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("checkpoint: write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_checkpoint(bytes);
    } catch (const std::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

Checkpoint checkpoint_from_parameters(const ParameterRefs& params, std::string metadata) {
    Checkpoint ckpt;
    ckpt.metadata = std::move(metadata);
    for (const auto* p : params) {
        auto d = p->value.data();
        ckpt.tensors.push_back({p->name, p->value.shape(), std::vector<float>(d.begin(), d.end()), p->frozen});
    }
    return ckpt;
}

void restore_parameters(const Checkpoint& ckpt, const ParameterRefs& params, const std::string& prefix) {
    for (auto* p : params) {
        const auto* t = ckpt.find(prefix + p->name);
        if (!t) throw std::runtime_error("checkpoint: missing parameter '" + prefix + p->name + "'");
        if (t->shape != p->value.shape()) {
            throw std::runtime_error("checkpoint: parameter '" + p->name + "' has shape " + shape_str(t->shape) +
                                     " but the model expects " + shape_str(p->value.shape()));
        }
        auto dst = p->value.mutable_data();
        std::copy(t->values.begin(), t->values.end(), dst.begin());
        p->frozen = t->frozen;
    }
}

}  // namespace nsr
