#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "bmi/cnn.hpp"
#include "bmi/errors.hpp"

// Checkpoint container: magic "BMIC", format version, dimensions,
// hyperparameters, label table, then every parameter and optimizer tensor
// as little-endian IEEE-754 doubles. Field order is fixed; sizes follow
// from the dimension header.

namespace bmi {

namespace {

constexpr char kMagic[4] = {'B', 'M', 'I', 'C'};
constexpr std::uint32_t kVersion = 1;

class Writer {
  public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void tensor(const std::vector<double>& t) {
        for (double v : t) f64(v);
    }
    const std::vector<char>& data() const { return buf_; }

  private:
    std::vector<char> buf_;
};

class Reader {
  public:
    explicit Reader(std::vector<char> data) : buf_(std::move(data)) {}

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(buf_[pos_++]);
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf_[pos_++])) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf_[pos_++])) << (8 * i);
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::vector<double> tensor(std::size_t count) {
        std::vector<double> t(count);
        for (double& v : t) v = f64();
        return t;
    }
    bool exhausted() const { return pos_ == buf_.size(); }

  private:
    void need(std::size_t n) {
        if (pos_ + n > buf_.size()) throw CheckpointError("checkpoint truncated");
    }
    std::vector<char> buf_;
    std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const NetworkModel& m, const std::string& path) {
    Writer w;
    w.u8(static_cast<std::uint8_t>(kMagic[0]));
    w.u8(static_cast<std::uint8_t>(kMagic[1]));
    w.u8(static_cast<std::uint8_t>(kMagic[2]));
    w.u8(static_cast<std::uint8_t>(kMagic[3]));
    w.u32(kVersion);

    w.i32(m.input_len);
    w.i32(m.pool);
    w.i32(m.bank.n_in);
    w.i32(m.bank.n_out);
    w.i32(m.bank.klen);
    w.i32(m.dense.h1);
    w.i32(m.dense.h2);
    w.i32(static_cast<std::int32_t>(m.classes.size()));
    w.i64(m.scale_w);

    const Hyperparameters& hp = m.hp;
    w.f64(hp.learning_rate);
    w.f64(hp.rate_annealing);
    w.f64(hp.rate_decay);
    w.f64(hp.momentum_start);
    w.f64(hp.momentum_ramp);
    w.f64(hp.momentum_stable);
    w.f64(hp.weight_decay);
    w.f64(hp.adam_beta1);
    w.f64(hp.adam_beta2);
    w.f64(hp.adam_epsilon);
    w.i32(hp.epochs);
    w.i32(hp.batch_size);
    w.u64(hp.seed);

    for (const ApplianceClass& c : m.classes) w.u8(c.bits());

    w.tensor(m.bank.k);
    w.tensor(m.bank.b);
    w.tensor(m.dense.W1);
    w.tensor(m.dense.b1);
    w.tensor(m.dense.W2);
    w.tensor(m.dense.b2);
    w.tensor(m.dense.W3);
    w.tensor(m.dense.b3);

    const OptimizerState& o = m.opt;
    w.tensor(o.m_k);
    w.tensor(o.v_k);
    w.tensor(o.m_kb);
    w.tensor(o.v_kb);
    w.tensor(o.m_W1);
    w.tensor(o.v_W1);
    w.tensor(o.m_b1);
    w.tensor(o.v_b1);
    w.tensor(o.m_W2);
    w.tensor(o.v_W2);
    w.tensor(o.m_b2);
    w.tensor(o.v_b2);
    w.tensor(o.m_W3);
    w.tensor(o.v_W3);
    w.tensor(o.m_b3);
    w.tensor(o.v_b3);
    w.i64(o.step);
    w.i64(o.samples_seen);
    w.f64(o.beta1_product);

    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw CheckpointError("cannot open " + tmp + " for writing");
        f.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
        if (!f) throw CheckpointError("write failed for " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw CheckpointError("cannot move checkpoint into place: " + ec.message());
}

NetworkModel load_checkpoint(const std::string& path) {
    std::vector<char> data;
    {
        std::ifstream f(path, std::ios::binary | std::ios::ate);
        if (!f) throw CheckpointError("cannot open checkpoint " + path);
        auto size = f.tellg();
        f.seekg(0);
        data.resize(static_cast<std::size_t>(size));
        f.read(data.data(), size);
        if (!f) throw CheckpointError("cannot read checkpoint " + path);
    }
    Reader r(std::move(data));
    char magic[4];
    for (char& c : magic) c = static_cast<char>(r.u8());
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw CheckpointError(path + " is not a model checkpoint");
    std::uint32_t version = r.u32();
    if (version != kVersion)
        throw CheckpointError("checkpoint format version " + std::to_string(version) +
                              " not supported (expected " + std::to_string(kVersion) + ")");

    NetworkModel m;
    m.input_len = r.i32();
    m.pool = r.i32();
    m.bank.n_in = r.i32();
    m.bank.n_out = r.i32();
    m.bank.klen = r.i32();
    m.dense.h1 = r.i32();
    m.dense.h2 = r.i32();
    std::int32_t n_classes = r.i32();
    m.scale_w = r.i64();
    if (m.input_len < 1 || m.pool < 1 || m.bank.n_in < 1 || m.bank.n_out < 1 ||
        m.bank.klen < 1 || m.bank.klen > m.input_len || m.dense.h1 < 1 || m.dense.h2 < 1 ||
        n_classes < 1 || m.scale_w < 1)
        throw CheckpointError("checkpoint header has inconsistent dimensions");

    Hyperparameters& hp = m.hp;
    hp.learning_rate = r.f64();
    hp.rate_annealing = r.f64();
    hp.rate_decay = r.f64();
    hp.momentum_start = r.f64();
    hp.momentum_ramp = r.f64();
    hp.momentum_stable = r.f64();
    hp.weight_decay = r.f64();
    hp.adam_beta1 = r.f64();
    hp.adam_beta2 = r.f64();
    hp.adam_epsilon = r.f64();
    hp.epochs = r.i32();
    hp.batch_size = r.i32();
    hp.seed = r.u64();

    m.classes.reserve(static_cast<std::size_t>(n_classes));
    for (std::int32_t i = 0; i < n_classes; ++i) {
        std::uint8_t bits = r.u8();
        if (bits >= (1u << kAllAppliances.size()))
            throw CheckpointError("checkpoint label table has an invalid class");
        m.classes.push_back(*ApplianceClass::from_bits(bits));
    }
    m.dense.out = n_classes;
    m.dense.in = m.bank.n_out * m.pooled_len();

    const auto nk = static_cast<std::size_t>(m.bank.n_in) * m.bank.n_out * m.bank.klen;
    const auto nb = static_cast<std::size_t>(m.bank.n_out);
    const auto nW1 = static_cast<std::size_t>(m.dense.h1) * m.dense.in;
    const auto nb1 = static_cast<std::size_t>(m.dense.h1);
    const auto nW2 = static_cast<std::size_t>(m.dense.h2) * m.dense.h1;
    const auto nb2 = static_cast<std::size_t>(m.dense.h2);
    const auto nW3 = static_cast<std::size_t>(m.dense.out) * m.dense.h2;
    const auto nb3 = static_cast<std::size_t>(m.dense.out);

    m.bank.k = r.tensor(nk);
    m.bank.b = r.tensor(nb);
    m.dense.W1 = r.tensor(nW1);
    m.dense.b1 = r.tensor(nb1);
    m.dense.W2 = r.tensor(nW2);
    m.dense.b2 = r.tensor(nb2);
    m.dense.W3 = r.tensor(nW3);
    m.dense.b3 = r.tensor(nb3);

    OptimizerState& o = m.opt;
    o.m_k = r.tensor(nk);
    o.v_k = r.tensor(nk);
    o.m_kb = r.tensor(nb);
    o.v_kb = r.tensor(nb);
    o.m_W1 = r.tensor(nW1);
    o.v_W1 = r.tensor(nW1);
    o.m_b1 = r.tensor(nb1);
    o.v_b1 = r.tensor(nb1);
    o.m_W2 = r.tensor(nW2);
    o.v_W2 = r.tensor(nW2);
    o.m_b2 = r.tensor(nb2);
    o.v_b2 = r.tensor(nb2);
    o.m_W3 = r.tensor(nW3);
    o.v_W3 = r.tensor(nW3);
    o.m_b3 = r.tensor(nb3);
    o.v_b3 = r.tensor(nb3);
    o.step = r.i64();
    o.samples_seen = r.i64();
    o.beta1_product = r.f64();
    if (!r.exhausted()) throw CheckpointError("checkpoint has trailing bytes");
    return m;
}

}  // namespace bmi
