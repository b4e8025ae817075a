#include "bmi/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "bmi/errors.hpp"
#include "bmi/kernels.hpp"
#include "bmi/rng.hpp"

namespace bmi {

namespace {

constexpr double kLogClamp = 1e-12;

// layer depths for rate decay: 0 = output, deeper layers further back
constexpr int kDepthOut = 0;
constexpr int kDepthH2 = 1;
constexpr int kDepthH1 = 2;
constexpr int kDepthConv = 3;

int conv_out_len(int input_len, int klen) { return input_len - klen + 1; }

}  // namespace

int NetworkModel::pooled_len() const {
    int zlen = conv_out_len(input_len, bank.klen);
    return (zlen + pool - 1) / pool;
}

double lr_schedule(const Hyperparameters& hp, std::int64_t step, int layer_depth) {
    double annealed = hp.learning_rate / (1.0 + hp.rate_annealing * static_cast<double>(step));
    return annealed * std::pow(hp.rate_decay, layer_depth);
}

double momentum_schedule(const Hyperparameters& hp, std::int64_t samples_seen) {
    if (static_cast<double>(samples_seen) >= hp.momentum_ramp) return hp.momentum_stable;
    double f = static_cast<double>(samples_seen) / hp.momentum_ramp;
    return hp.momentum_start + (hp.momentum_stable - hp.momentum_start) * f;
}

std::vector<double> he_init(std::size_t count, std::size_t fan_in, std::uint64_t seed) {
    if (fan_in == 0) throw Error("he_init requires fan_in >= 1");
    Rng rng(seed);
    const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
    std::vector<double> w(count);
    for (double& v : w) v = rng.normal() * std_dev;
    return w;
}

NetworkModel make_model(int input_len, int pool, int n_kernels, int klen, int h1, int h2,
                        const std::vector<ApplianceClass>& classes, const Hyperparameters& hp) {
    if (input_len < 1 || pool < 1 || n_kernels < 1 || klen < 1 || h1 < 1 || h2 < 1)
        throw Error("model dimensions must be positive");
    if (klen > input_len)
        throw KernelTooLong("kernel length " + std::to_string(klen) + " exceeds input length " +
                            std::to_string(input_len));
    if (classes.empty()) throw Error("model needs at least one class");

    NetworkModel m;
    m.hp = hp;
    m.input_len = input_len;
    m.pool = pool;
    m.classes = classes;
    m.bank.n_in = 1;
    m.bank.n_out = n_kernels;
    m.bank.klen = klen;
    m.dense.h1 = h1;
    m.dense.h2 = h2;
    m.dense.out = static_cast<int>(classes.size());
    m.dense.in = n_kernels * m.pooled_len();

    std::uint64_t s = hp.seed;
    auto sub = [&s](std::uint64_t tag) { return mix_seed(s, tag); };
    m.bank.k = he_init(static_cast<std::size_t>(m.bank.n_in) * n_kernels * klen,
                       static_cast<std::size_t>(m.bank.n_in) * klen, sub(1));
    m.bank.b.assign(static_cast<std::size_t>(n_kernels), 0.0);
    m.dense.W1 = he_init(static_cast<std::size_t>(h1) * m.dense.in,
                         static_cast<std::size_t>(m.dense.in), sub(2));
    m.dense.b1.assign(static_cast<std::size_t>(h1), 0.0);
    m.dense.W2 =
        he_init(static_cast<std::size_t>(h2) * h1, static_cast<std::size_t>(h1), sub(3));
    m.dense.b2.assign(static_cast<std::size_t>(h2), 0.0);
    m.dense.W3 = he_init(static_cast<std::size_t>(m.dense.out) * h2,
                         static_cast<std::size_t>(h2), sub(4));
    m.dense.b3.assign(static_cast<std::size_t>(m.dense.out), 0.0);

    auto zeros_like = [](const std::vector<double>& t) {
        return std::vector<double>(t.size(), 0.0);
    };
    m.opt.m_k = zeros_like(m.bank.k);
    m.opt.v_k = zeros_like(m.bank.k);
    m.opt.m_kb = zeros_like(m.bank.b);
    m.opt.v_kb = zeros_like(m.bank.b);
    m.opt.m_W1 = zeros_like(m.dense.W1);
    m.opt.v_W1 = zeros_like(m.dense.W1);
    m.opt.m_b1 = zeros_like(m.dense.b1);
    m.opt.v_b1 = zeros_like(m.dense.b1);
    m.opt.m_W2 = zeros_like(m.dense.W2);
    m.opt.v_W2 = zeros_like(m.dense.W2);
    m.opt.m_b2 = zeros_like(m.dense.b2);
    m.opt.v_b2 = zeros_like(m.dense.b2);
    m.opt.m_W3 = zeros_like(m.dense.W3);
    m.opt.v_W3 = zeros_like(m.dense.W3);
    m.opt.m_b3 = zeros_like(m.dense.b3);
    m.opt.v_b3 = zeros_like(m.dense.b3);
    return m;
}

std::vector<double> softmax(const std::vector<double>& logits) {
    std::vector<double> p(logits.size());
    double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

double cross_entropy(const std::vector<double>& targets_onehot,
                     const std::vector<double>& predictions, int n, int classes) {
    std::size_t need = static_cast<std::size_t>(n) * classes;
    if (targets_onehot.size() != need || predictions.size() != need)
        throw DimensionMismatch("loss batch size mismatch");
    double e = 0.0;
    for (std::size_t i = 0; i < need; ++i)
        if (targets_onehot[i] != 0.0)
            e -= targets_onehot[i] * std::log(std::max(predictions[i], kLogClamp));
    return e;
}

void forward(const NetworkModel& model, const std::vector<double>& x, ForwardCache& c) {
    const int L = model.input_len;
    if (static_cast<int>(x.size()) != L)
        throw DimensionMismatch("input length " + std::to_string(x.size()) + ", expected " +
                                std::to_string(L));
    if (model.bank.klen > L)
        throw KernelTooLong("kernel length " + std::to_string(model.bank.klen) +
                            " exceeds input length " + std::to_string(L));
    const int n_out = model.bank.n_out;
    const int zlen = conv_out_len(L, model.bank.klen);
    const int plen = model.pooled_len();

    c.x0 = x;
    c.z1.assign(static_cast<std::size_t>(n_out) * zlen, 0.0);
    kernels::conv1d_forward(c.x0.data(), model.bank.n_in, L, model.bank.k.data(),
                            model.bank.b.data(), n_out, model.bank.klen, c.z1.data());
    c.a1.resize(c.z1.size());
    kernels::relu_forward(c.z1.data(), static_cast<int>(c.z1.size()), c.a1.data());

    c.p1.assign(static_cast<std::size_t>(n_out) * plen, 0.0);
    c.argmax.assign(static_cast<std::size_t>(n_out) * plen, 0);
    for (int j = 0; j < n_out; ++j) {
        kernels::maxpool_forward(c.a1.data() + static_cast<std::size_t>(j) * zlen, zlen,
                                 model.pool, c.p1.data() + static_cast<std::size_t>(j) * plen,
                                 c.argmax.data() + static_cast<std::size_t>(j) * plen);
        // pooled argmax indices are per-map; lift to the flat a1 layout
        for (int w = 0; w < plen; ++w)
            c.argmax[static_cast<std::size_t>(j) * plen + w] += j * zlen;
    }

    const DenseStack& d = model.dense;
    if (static_cast<int>(c.p1.size()) != d.in)
        throw DimensionMismatch("flattened width " + std::to_string(c.p1.size()) +
                                ", dense expects " + std::to_string(d.in));
    c.z2.assign(static_cast<std::size_t>(d.h1), 0.0);
    kernels::affine_forward(d.W1.data(), d.b1.data(), d.h1, d.in, c.p1.data(), c.z2.data());
    c.a2.resize(c.z2.size());
    kernels::relu_forward(c.z2.data(), d.h1, c.a2.data());

    c.z3.assign(static_cast<std::size_t>(d.h2), 0.0);
    kernels::affine_forward(d.W2.data(), d.b2.data(), d.h2, d.h1, c.a2.data(), c.z3.data());
    c.a3.resize(c.z3.size());
    kernels::relu_forward(c.z3.data(), d.h2, c.a3.data());

    c.logits.assign(static_cast<std::size_t>(d.out), 0.0);
    kernels::affine_forward(d.W3.data(), d.b3.data(), d.out, d.h2, c.a3.data(), c.logits.data());
    c.probs = softmax(c.logits);
}

Gradients zero_gradients(const NetworkModel& m) {
    Gradients g;
    g.k.assign(m.bank.k.size(), 0.0);
    g.kb.assign(m.bank.b.size(), 0.0);
    g.W1.assign(m.dense.W1.size(), 0.0);
    g.b1.assign(m.dense.b1.size(), 0.0);
    g.W2.assign(m.dense.W2.size(), 0.0);
    g.b2.assign(m.dense.b2.size(), 0.0);
    g.W3.assign(m.dense.W3.size(), 0.0);
    g.b3.assign(m.dense.b3.size(), 0.0);
    return g;
}

namespace {

double decay_term(const NetworkModel& m) {
    if (m.hp.weight_decay == 0.0) return 0.0;
    auto sq = [](const std::vector<double>& t) {
        double s = 0.0;
        for (double v : t) s += v * v;
        return s;
    };
    return 0.5 * m.hp.weight_decay *
           (sq(m.bank.k) + sq(m.dense.W1) + sq(m.dense.W2) + sq(m.dense.W3));
}

void add_decay_gradient(const NetworkModel& m, Gradients& g) {
    const double lambda = m.hp.weight_decay;
    if (lambda == 0.0) return;
    auto add = [lambda](const std::vector<double>& w, std::vector<double>& gw) {
        for (std::size_t i = 0; i < w.size(); ++i) gw[i] += lambda * w[i];
    };
    add(m.bank.k, g.k);
    add(m.dense.W1, g.W1);
    add(m.dense.W2, g.W2);
    add(m.dense.W3, g.W3);
}

}  // namespace

double batch_loss(const NetworkModel& model, const std::vector<const Segment*>& batch,
                  const std::vector<std::size_t>& targets) {
    if (batch.size() != targets.size()) throw DimensionMismatch("batch/target count mismatch");
    ForwardCache c;
    double e = 0.0;
    for (std::size_t n = 0; n < batch.size(); ++n) {
        forward(model, batch[n]->samples, c);
        e -= std::log(std::max(c.probs[targets[n]], kLogClamp));
    }
    return e + decay_term(model);
}

double backprop_batch(const NetworkModel& model, const std::vector<const Segment*>& batch,
                      const std::vector<std::size_t>& targets, Gradients& g) {
    if (batch.size() != targets.size()) throw DimensionMismatch("batch/target count mismatch");
    const DenseStack& d = model.dense;
    const int n_out = model.bank.n_out;
    const int zlen = conv_out_len(model.input_len, model.bank.klen);
    const int plen = model.pooled_len();

    ForwardCache c;
    std::vector<double> dlogits(static_cast<std::size_t>(d.out));
    std::vector<double> da3(static_cast<std::size_t>(d.h2));
    std::vector<double> dz3(static_cast<std::size_t>(d.h2));
    std::vector<double> da2(static_cast<std::size_t>(d.h1));
    std::vector<double> dz2(static_cast<std::size_t>(d.h1));
    std::vector<double> dflat(static_cast<std::size_t>(d.in));
    std::vector<double> da1(static_cast<std::size_t>(n_out) * zlen);
    std::vector<double> dz1(static_cast<std::size_t>(n_out) * zlen);

    double e = 0.0;
    for (std::size_t n = 0; n < batch.size(); ++n) {
        forward(model, batch[n]->samples, c);
        e -= std::log(std::max(c.probs[targets[n]], kLogClamp));

        // softmax + cross-entropy head
        for (int i = 0; i < d.out; ++i) dlogits[static_cast<std::size_t>(i)] = c.probs[i];
        dlogits[targets[n]] -= 1.0;

        kernels::affine_grad_params(c.a3.data(), dlogits.data(), d.out, d.h2, g.W3.data(),
                                    g.b3.data());
        kernels::affine_backward_input(d.W3.data(), dlogits.data(), d.out, d.h2, da3.data());
        std::fill(dz3.begin(), dz3.end(), 0.0);
        kernels::relu_backward_add(c.z3.data(), da3.data(), d.h2, dz3.data());

        kernels::affine_grad_params(c.a2.data(), dz3.data(), d.h2, d.h1, g.W2.data(),
                                    g.b2.data());
        kernels::affine_backward_input(d.W2.data(), dz3.data(), d.h2, d.h1, da2.data());
        std::fill(dz2.begin(), dz2.end(), 0.0);
        kernels::relu_backward_add(c.z2.data(), da2.data(), d.h1, dz2.data());

        kernels::affine_grad_params(c.p1.data(), dz2.data(), d.h1, d.in, g.W1.data(),
                                    g.b1.data());
        kernels::affine_backward_input(d.W1.data(), dz2.data(), d.h1, d.in, dflat.data());

        std::fill(da1.begin(), da1.end(), 0.0);
        kernels::maxpool_backward(c.argmax.data(), dflat.data(), n_out * plen, da1.data());
        std::fill(dz1.begin(), dz1.end(), 0.0);
        kernels::relu_backward_add(c.z1.data(), da1.data(), n_out * zlen, dz1.data());

        kernels::conv1d_grad_params(c.x0.data(), model.bank.n_in, model.input_len, dz1.data(),
                                    n_out, model.bank.klen, g.k.data(), g.kb.data());
    }
    add_decay_gradient(model, g);
    return e + decay_term(model);
}

namespace {

void adam_tensor(std::vector<double>& theta, const std::vector<double>& grad,
                 std::vector<double>& m, std::vector<double>& v, double mu, double beta2,
                 double eta, double eps, double m_corr, double v_corr) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
        m[i] = mu * m[i] + (1.0 - mu) * grad[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
        double m_hat = m[i] / m_corr;
        double v_hat = v[i] / v_corr;
        theta[i] -= eta * m_hat / (std::sqrt(v_hat) + eps);
    }
}

}  // namespace

void update_parameters(NetworkModel& model, const Gradients& g, std::int64_t batch_examples) {
    OptimizerState& o = model.opt;
    const Hyperparameters& hp = model.hp;
    const double mu = momentum_schedule(hp, o.samples_seen);
    const double beta2 = hp.adam_beta2;

    o.beta1_product *= mu;
    const double m_corr = 1.0 - o.beta1_product;
    const double v_corr =
        1.0 - std::pow(beta2, static_cast<double>(o.step + 1));

    auto eta = [&](int depth) { return lr_schedule(hp, o.step, depth); };
    adam_tensor(model.bank.k, g.k, o.m_k, o.v_k, mu, beta2, eta(kDepthConv), hp.adam_epsilon,
                m_corr, v_corr);
    adam_tensor(model.bank.b, g.kb, o.m_kb, o.v_kb, mu, beta2, eta(kDepthConv),
                hp.adam_epsilon, m_corr, v_corr);
    adam_tensor(model.dense.W1, g.W1, o.m_W1, o.v_W1, mu, beta2, eta(kDepthH1),
                hp.adam_epsilon, m_corr, v_corr);
    adam_tensor(model.dense.b1, g.b1, o.m_b1, o.v_b1, mu, beta2, eta(kDepthH1),
                hp.adam_epsilon, m_corr, v_corr);
    adam_tensor(model.dense.W2, g.W2, o.m_W2, o.v_W2, mu, beta2, eta(kDepthH2),
                hp.adam_epsilon, m_corr, v_corr);
    adam_tensor(model.dense.b2, g.b2, o.m_b2, o.v_b2, mu, beta2, eta(kDepthH2),
                hp.adam_epsilon, m_corr, v_corr);
    adam_tensor(model.dense.W3, g.W3, o.m_W3, o.v_W3, mu, beta2, eta(kDepthOut),
                hp.adam_epsilon, m_corr, v_corr);
    adam_tensor(model.dense.b3, g.b3, o.m_b3, o.v_b3, mu, beta2, eta(kDepthOut),
                hp.adam_epsilon, m_corr, v_corr);

    o.step += 1;
    o.samples_seen += batch_examples;
}

std::pair<double, double> evaluate(const NetworkModel& model, const std::vector<Segment>& segs) {
    if (segs.empty()) return {0.0, 0.0};
    ForwardCache c;
    double loss = 0.0;
    std::size_t correct = 0;
    for (const Segment& s : segs) {
        if (!s.label) throw Error("evaluate needs labeled segments");
        std::size_t t = 0;
        {
            auto it = std::lower_bound(model.classes.begin(), model.classes.end(), *s.label);
            if (it == model.classes.end() || !(*it == *s.label))
                throw Error("segment label " + s.label->name() + " not in model classes");
            t = static_cast<std::size_t>(it - model.classes.begin());
        }
        forward(model, s.samples, c);
        loss -= std::log(std::max(c.probs[t], kLogClamp));
        std::size_t best = 0;
        for (std::size_t i = 1; i < c.probs.size(); ++i)
            if (c.probs[i] > c.probs[best]) best = i;
        if (best == t) ++correct;
    }
    return {loss / static_cast<double>(segs.size()),
            static_cast<double>(correct) / static_cast<double>(segs.size())};
}

TrainHistory train(NetworkModel& model, const DatasetSplit& split) {
    TrainHistory history;
    if (model.hp.epochs <= 0) return history;
    if (split.train.empty()) throw Error("training split is empty");

    std::vector<std::size_t> targets(split.train.size());
    for (std::size_t i = 0; i < split.train.size(); ++i) {
        if (!split.train[i].label) throw Error("training segments must be labeled");
        auto it = std::lower_bound(model.classes.begin(), model.classes.end(),
                                   *split.train[i].label);
        if (it == model.classes.end() || !(*it == *split.train[i].label))
            throw Error("training label " + split.train[i].label->name() +
                        " not in model classes");
        targets[i] = static_cast<std::size_t>(it - model.classes.begin());
    }

    std::vector<std::size_t> order(split.train.size());
    std::iota(order.begin(), order.end(), 0);

    double best_val = std::numeric_limits<double>::infinity();
    KernelBank best_bank = model.bank;
    DenseStack best_dense = model.dense;
    bool have_best = false;

    const std::size_t bs = static_cast<std::size_t>(std::max(model.hp.batch_size, 1));
    for (int epoch = 0; epoch < model.hp.epochs; ++epoch) {
        Rng rng(mix_seed(model.hp.seed, 0xE70C000ULL + static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = order.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(order[i - 1], order[j]);
        }
        for (std::size_t at = 0; at < order.size(); at += bs) {
            std::size_t n = std::min(bs, order.size() - at);
            std::vector<const Segment*> batch(n);
            std::vector<std::size_t> batch_targets(n);
            for (std::size_t i = 0; i < n; ++i) {
                batch[i] = &split.train[order[at + i]];
                batch_targets[i] = targets[order[at + i]];
            }
            Gradients g = zero_gradients(model);
            backprop_batch(model, batch, batch_targets, g);
            update_parameters(model, g, static_cast<std::int64_t>(n));
        }

        EpochStats st;
        auto [tl, ta] = evaluate(model, split.train);
        st.train_loss = tl;
        st.train_accuracy = ta;
        if (!split.validation.empty()) {
            auto [vl, va] = evaluate(model, split.validation);
            st.validation_loss = vl;
            st.validation_accuracy = va;
            if (vl < best_val) {
                best_val = vl;
                best_bank = model.bank;
                best_dense = model.dense;
                have_best = true;
            }
        }
        history.push_back(st);
    }
    if (have_best) {
        model.bank = best_bank;
        model.dense = best_dense;
    }
    return history;
}

std::pair<ApplianceClass, double> classify_segment(const NetworkModel& model,
                                                   const Segment& seg) {
    ForwardCache c;
    forward(model, seg.samples, c);
    std::size_t best = 0;
    for (std::size_t i = 1; i < c.probs.size(); ++i)
        if (c.probs[i] > c.probs[best]) best = i;  // lowest index wins ties
    return {model.classes[best], c.probs[best]};
}

std::vector<DetectionEvent> detect_events(const NetworkModel& model,
                                          const ValidatedStream& stream,
                                          double confidence_floor) {
    const int L = model.input_len;
    const int stride = std::max(L / 2, 1);
    std::vector<Segment> segs;
    try {
        segs = segment_windows(stream, L, stride);
    } catch (const StreamTooShort&) {
        return {};
    }

    const double inv = 1.0 / static_cast<double>(model.scale_w);
    struct Hit {
        std::int64_t start, end;
        double conf;
    };
    std::map<Appliance, std::vector<Hit>> hits;
    Segment scaled;
    for (const Segment& s : segs) {
        scaled = s;
        for (double& v : scaled.samples) v *= inv;
        auto [cls, conf] = classify_segment(model, scaled);
        if (cls.is_background() || conf < confidence_floor) continue;
        std::int64_t end = s.start_ts + static_cast<std::int64_t>(L) * stream.cadence_s;
        for (Appliance a : cls.members()) hits[a].push_back({s.start_ts, end, conf});
    }

    std::vector<DetectionEvent> out;
    for (auto& [a, v] : hits) {
        std::sort(v.begin(), v.end(),
                  [](const Hit& l, const Hit& r) { return l.start < r.start; });
        std::size_t i = 0;
        while (i < v.size()) {
            std::int64_t start = v[i].start, end = v[i].end;
            double conf = v[i].conf;
            std::size_t j = i + 1;
            while (j < v.size() && v[j].start <= end) {
                end = std::max(end, v[j].end);
                conf = std::max(conf, v[j].conf);
                ++j;
            }
            DetectionEvent e;
            e.pid = stream.pid;
            e.appliances = {a};
            e.start_ts = start;
            e.end_ts = end;
            e.confidence = conf;
            out.push_back(std::move(e));
            i = j;
        }
    }
    std::sort(out.begin(), out.end(), [](const DetectionEvent& l, const DetectionEvent& r) {
        if (l.start_ts != r.start_ts) return l.start_ts < r.start_ts;
        return *l.appliances.begin() < *r.appliances.begin();
    });
    return out;
}

}  // namespace bmi
