#include "weave/ops.hpp"

#include <cmath>
#include <string>

namespace weave::ops {

namespace {

void require_matrix(const Tensor& t, const char* who) {
    if (t.shape().size() != 2) {
        throw ShapeError(std::string(who) + ": expected a matrix, got shape " +
                         shape_str(t.shape()));
    }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* who) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(who) + ": shape mismatch " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    }
}

bool wants_grad(Tape* tape, const Tensor& a) {
    return tape != nullptr && a.requires_grad();
}

bool wants_grad(Tape* tape, const Tensor& a, const Tensor& b) {
    return tape != nullptr && (a.requires_grad() || b.requires_grad());
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

Tensor matmul(Tape* tape, const Tensor& a, const Tensor& b) {
    require_matrix(a, "matmul");
    require_matrix(b, "matmul");
    const Dim m = a.rows(), k = a.cols(), n = b.cols();
    if (b.rows() != k) {
        throw ShapeError("matmul: inner dimensions disagree: " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    }
    Tensor out = Tensor::zeros({m, n});
    const auto& ad = a.data();
    const auto& bd = b.data();
    auto& od = out.data();
    for (Dim i = 0; i < m; ++i) {
        for (Dim j = 0; j < n; ++j) {
            double acc = 0.0;
            for (Dim l = 0; l < k; ++l) acc += ad[i * k + l] * bd[l * n + j];
            od[i * n + j] = acc;
        }
    }
    if (wants_grad(tape, a, b)) {
        out.set_requires_grad(true);
        Tensor ac = a, bc = b, oc = out;
        tape->record([ac, bc, oc, m, k, n]() mutable {
            if (!oc.has_grad()) return;
            const auto& og = oc.grad();
            if (ac.requires_grad()) {
                auto& ag = ac.grad();
                const auto& bd = bc.data();
                for (Dim i = 0; i < m; ++i)
                    for (Dim l = 0; l < k; ++l) {
                        double acc = 0.0;
                        for (Dim j = 0; j < n; ++j)
                            acc += og[i * n + j] * bd[l * n + j];
                        ag[i * k + l] += acc;
                    }
            }
            if (bc.requires_grad()) {
                auto& bg = bc.grad();
                const auto& ad = ac.data();
                for (Dim l = 0; l < k; ++l)
                    for (Dim j = 0; j < n; ++j) {
                        double acc = 0.0;
                        for (Dim i = 0; i < m; ++i)
                            acc += ad[i * k + l] * og[i * n + j];
                        bg[l * n + j] += acc;
                    }
            }
        });
    }
    return out;
}

Tensor matmul_nt(Tape* tape, const Tensor& a, const Tensor& b) {
    require_matrix(a, "matmul_nt");
    require_matrix(b, "matmul_nt");
    const Dim m = a.rows(), k = a.cols(), n = b.rows();
    if (b.cols() != k) {
        throw ShapeError("matmul_nt: inner dimensions disagree: " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()) +
                         "^T");
    }
    Tensor out = Tensor::zeros({m, n});
    const auto& ad = a.data();
    const auto& bd = b.data();
    auto& od = out.data();
    for (Dim i = 0; i < m; ++i) {
        for (Dim j = 0; j < n; ++j) {
            double acc = 0.0;
            for (Dim l = 0; l < k; ++l) acc += ad[i * k + l] * bd[j * k + l];
            od[i * n + j] = acc;
        }
    }
    if (wants_grad(tape, a, b)) {
        out.set_requires_grad(true);
        Tensor ac = a, bc = b, oc = out;
        tape->record([ac, bc, oc, m, k, n]() mutable {
            if (!oc.has_grad()) return;
            const auto& og = oc.grad();
            if (ac.requires_grad()) {
                auto& ag = ac.grad();
                const auto& bd = bc.data();
                for (Dim i = 0; i < m; ++i)
                    for (Dim l = 0; l < k; ++l) {
                        double acc = 0.0;
                        for (Dim j = 0; j < n; ++j)
                            acc += og[i * n + j] * bd[j * k + l];
                        ag[i * k + l] += acc;
                    }
            }
            if (bc.requires_grad()) {
                auto& bg = bc.grad();
                const auto& ad = ac.data();
                for (Dim j = 0; j < n; ++j)
                    for (Dim l = 0; l < k; ++l) {
                        double acc = 0.0;
                        for (Dim i = 0; i < m; ++i)
                            acc += og[i * n + j] * ad[i * k + l];
                        bg[j * k + l] += acc;
                    }
            }
        });
    }
    return out;
}

Tensor add(Tape* tape, const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    Tensor out = Tensor::zeros(a.shape());
    const std::size_t n = a.data().size();
    for (std::size_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] + b.data()[i];
    if (wants_grad(tape, a, b)) {
        out.set_requires_grad(true);
        Tensor ac = a, bc = b, oc = out;
        tape->record([ac, bc, oc]() mutable {
            if (!oc.has_grad()) return;
            const auto& og = oc.grad();
            if (ac.requires_grad()) {
                auto& g = ac.grad();
                for (std::size_t i = 0; i < og.size(); ++i) g[i] += og[i];
            }
            if (bc.requires_grad()) {
                auto& g = bc.grad();
                for (std::size_t i = 0; i < og.size(); ++i) g[i] += og[i];
            }
        });
    }
    return out;
}

Tensor mul(Tape* tape, const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    Tensor out = Tensor::zeros(a.shape());
    const std::size_t n = a.data().size();
    for (std::size_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] * b.data()[i];
    if (wants_grad(tape, a, b)) {
        out.set_requires_grad(true);
        Tensor ac = a, bc = b, oc = out;
        tape->record([ac, bc, oc]() mutable {
            if (!oc.has_grad()) return;
            const auto& og = oc.grad();
            if (ac.requires_grad()) {
                auto& g = ac.grad();
                for (std::size_t i = 0; i < og.size(); ++i)
                    g[i] += og[i] * bc.data()[i];
            }
            if (bc.requires_grad()) {
                auto& g = bc.grad();
                for (std::size_t i = 0; i < og.size(); ++i)
                    g[i] += og[i] * ac.data()[i];
            }
        });
    }
    return out;
}

Tensor scale(Tape* tape, const Tensor& a, double c) {
    Tensor out = Tensor::zeros(a.shape());
    for (std::size_t i = 0; i < a.data().size(); ++i)
        out.data()[i] = a.data()[i] * c;
    if (wants_grad(tape, a)) {
        out.set_requires_grad(true);
        Tensor ac = a, oc = out;
        tape->record([ac, oc, c]() mutable {
            if (!oc.has_grad() || !ac.requires_grad()) return;
            const auto& og = oc.grad();
            auto& g = ac.grad();
            for (std::size_t i = 0; i < og.size(); ++i) g[i] += og[i] * c;
        });
    }
    return out;
}

Tensor add_bias(Tape* tape, const Tensor& a, const Tensor& bias) {
    require_matrix(a, "add_bias");
    if (bias.size() != a.cols()) {
        throw ShapeError("add_bias: bias length " + shape_str(bias.shape()) +
                         " does not match " + shape_str(a.shape()));
    }
    const Dim m = a.rows(), n = a.cols();
    Tensor out = Tensor::zeros(a.shape());
    for (Dim i = 0; i < m; ++i)
        for (Dim j = 0; j < n; ++j)
            out.data()[i * n + j] = a.data()[i * n + j] + bias.data()[j];
    if (wants_grad(tape, a, bias)) {
        out.set_requires_grad(true);
        Tensor ac = a, bc = bias, oc = out;
        tape->record([ac, bc, oc, m, n]() mutable {
            if (!oc.has_grad()) return;
            const auto& og = oc.grad();
            if (ac.requires_grad()) {
                auto& g = ac.grad();
                for (std::size_t i = 0; i < og.size(); ++i) g[i] += og[i];
            }
            if (bc.requires_grad()) {
                auto& g = bc.grad();
                for (Dim i = 0; i < m; ++i)
                    for (Dim j = 0; j < n; ++j) g[j] += og[i * n + j];
            }
        });
    }
    return out;
}

Tensor silu(Tape* tape, const Tensor& a) {
    Tensor out = Tensor::zeros(a.shape());
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        double x = a.data()[i];
        out.data()[i] = x * sigmoid(x);
    }
    if (wants_grad(tape, a)) {
        out.set_requires_grad(true);
        Tensor ac = a, oc = out;
        tape->record([ac, oc]() mutable {
            if (!oc.has_grad() || !ac.requires_grad()) return;
            const auto& og = oc.grad();
            auto& g = ac.grad();
            for (std::size_t i = 0; i < og.size(); ++i) {
                double x = ac.data()[i];
                double s = sigmoid(x);
                g[i] += og[i] * s * (1.0 + x * (1.0 - s));
            }
        });
    }
    return out;
}

Tensor rmsnorm(Tape* tape, const Tensor& x, const Tensor& gain, double eps) {
    require_matrix(x, "rmsnorm");
    const Dim m = x.rows(), n = x.cols();
    if (gain.size() != n) {
        throw ShapeError("rmsnorm: gain length " + shape_str(gain.shape()) +
                         " does not match " + shape_str(x.shape()));
    }
    Tensor out = Tensor::zeros(x.shape());
    std::vector<double> inv_rms(static_cast<std::size_t>(m));
    for (Dim i = 0; i < m; ++i) {
        double ms = 0.0;
        for (Dim j = 0; j < n; ++j) {
            double v = x.data()[i * n + j];
            ms += v * v;
        }
        ms /= static_cast<double>(n);
        double r = 1.0 / std::sqrt(ms + eps);
        inv_rms[static_cast<std::size_t>(i)] = r;
        for (Dim j = 0; j < n; ++j)
            out.data()[i * n + j] = x.data()[i * n + j] * r * gain.data()[j];
    }
    if (wants_grad(tape, x, gain)) {
        out.set_requires_grad(true);
        Tensor xc = x, gc = gain, oc = out;
        tape->record([xc, gc, oc, inv_rms, m, n]() mutable {
            if (!oc.has_grad()) return;
            const auto& og = oc.grad();
            for (Dim i = 0; i < m; ++i) {
                const double r = inv_rms[static_cast<std::size_t>(i)];
                if (xc.requires_grad()) {
                    // dx_j = r*g_j*u_j - x_j * r^3/n * sum_i(u_i g_i x_i)
                    double dot = 0.0;
                    for (Dim j = 0; j < n; ++j)
                        dot += og[i * n + j] * gc.data()[j] * xc.data()[i * n + j];
                    auto& xg = xc.grad();
                    const double c = dot * r * r * r / static_cast<double>(n);
                    for (Dim j = 0; j < n; ++j)
                        xg[i * n + j] += og[i * n + j] * gc.data()[j] * r -
                                         xc.data()[i * n + j] * c;
                }
                if (gc.requires_grad()) {
                    auto& gg = gc.grad();
                    for (Dim j = 0; j < n; ++j)
                        gg[j] += og[i * n + j] * xc.data()[i * n + j] * r;
                }
            }
        });
    }
    return out;
}

Tensor causal_softmax(Tape* tape, const Tensor& scores) {
    require_matrix(scores, "causal_softmax");
    const Dim n = scores.rows();
    if (scores.cols() != n) {
        throw ShapeError("causal_softmax: expected a square matrix, got " +
                         shape_str(scores.shape()));
    }
    Tensor out = Tensor::zeros(scores.shape());
    for (Dim r = 0; r < n; ++r) {
        double mx = scores.data()[r * n];
        for (Dim c = 1; c <= r; ++c) mx = std::max(mx, scores.data()[r * n + c]);
        double denom = 0.0;
        for (Dim c = 0; c <= r; ++c)
            denom += std::exp(scores.data()[r * n + c] - mx);
        for (Dim c = 0; c <= r; ++c)
            out.data()[r * n + c] = std::exp(scores.data()[r * n + c] - mx) / denom;
    }
    if (wants_grad(tape, scores)) {
        out.set_requires_grad(true);
        Tensor sc = scores, oc = out;
        tape->record([sc, oc, n]() mutable {
            if (!oc.has_grad() || !sc.requires_grad()) return;
            const auto& og = oc.grad();
            auto& sg = sc.grad();
            for (Dim r = 0; r < n; ++r) {
                double dot = 0.0;
                for (Dim c = 0; c <= r; ++c)
                    dot += og[r * n + c] * oc.data()[r * n + c];
                for (Dim c = 0; c <= r; ++c)
                    sg[r * n + c] +=
                        oc.data()[r * n + c] * (og[r * n + c] - dot);
            }
        });
    }
    return out;
}

Tensor embedding_rows(Tape* tape, const Tensor& table,
                      const std::vector<TokenId>& ids) {
    require_matrix(table, "embedding_rows");
    const Dim v = table.rows(), d = table.cols();
    for (TokenId id : ids) {
        if (id < 0 || id >= v) {
            throw IndexError("embedding_rows: id " + std::to_string(id) +
                             " out of range [0, " + std::to_string(v) + ")");
        }
    }
    const Dim m = static_cast<Dim>(ids.size());
    Tensor out = Tensor::zeros({m, d});
    for (Dim i = 0; i < m; ++i)
        for (Dim j = 0; j < d; ++j)
            out.data()[i * d + j] = table.data()[ids[static_cast<std::size_t>(i)] * d + j];
    if (wants_grad(tape, table)) {
        out.set_requires_grad(true);
        Tensor tc = table, oc = out;
        std::vector<TokenId> idc = ids;
        tape->record([tc, oc, idc, d]() mutable {
            if (!oc.has_grad() || !tc.requires_grad()) return;
            const auto& og = oc.grad();
            auto& tg = tc.grad();
            for (std::size_t i = 0; i < idc.size(); ++i)
                for (Dim j = 0; j < d; ++j)
                    tg[idc[i] * d + j] += og[static_cast<Dim>(i) * d + j];
        });
    }
    return out;
}

Tensor slice_cols(Tape* tape, const Tensor& a, Dim start, Dim count) {
    require_matrix(a, "slice_cols");
    const Dim m = a.rows(), n = a.cols();
    if (start < 0 || count < 0 || start + count > n) {
        throw IndexError("slice_cols: range [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") out of " +
                         shape_str(a.shape()));
    }
    Tensor out = Tensor::zeros({m, count});
    for (Dim i = 0; i < m; ++i)
        for (Dim j = 0; j < count; ++j)
            out.data()[i * count + j] = a.data()[i * n + start + j];
    if (wants_grad(tape, a)) {
        out.set_requires_grad(true);
        Tensor ac = a, oc = out;
        tape->record([ac, oc, start, count, m, n]() mutable {
            if (!oc.has_grad() || !ac.requires_grad()) return;
            const auto& og = oc.grad();
            auto& g = ac.grad();
            for (Dim i = 0; i < m; ++i)
                for (Dim j = 0; j < count; ++j)
                    g[i * n + start + j] += og[i * count + j];
        });
    }
    return out;
}

Tensor concat_cols(Tape* tape, const std::vector<Tensor>& parts) {
    if (parts.empty()) throw ShapeError("concat_cols: no parts");
    const Dim m = parts[0].rows();
    Dim total = 0;
    bool needs = false;
    for (const Tensor& p : parts) {
        require_matrix(p, "concat_cols");
        if (p.rows() != m)
            throw ShapeError("concat_cols: row mismatch " +
                             shape_str(parts[0].shape()) + " vs " +
                             shape_str(p.shape()));
        total += p.cols();
        needs = needs || p.requires_grad();
    }
    Tensor out = Tensor::zeros({m, total});
    Dim off = 0;
    for (const Tensor& p : parts) {
        const Dim w = p.cols();
        for (Dim i = 0; i < m; ++i)
            for (Dim j = 0; j < w; ++j)
                out.data()[i * total + off + j] = p.data()[i * w + j];
        off += w;
    }
    if (tape != nullptr && needs) {
        out.set_requires_grad(true);
        std::vector<Tensor> pc = parts;
        Tensor oc = out;
        tape->record([pc, oc, m, total]() mutable {
            if (!oc.has_grad()) return;
            const auto& og = oc.grad();
            Dim off = 0;
            for (Tensor& p : pc) {
                const Dim w = p.cols();
                if (p.requires_grad()) {
                    auto& g = p.grad();
                    for (Dim i = 0; i < m; ++i)
                        for (Dim j = 0; j < w; ++j)
                            g[i * w + j] += og[i * total + off + j];
                }
                off += w;
            }
        });
    }
    return out;
}

Tensor sum(Tape* tape, const Tensor& a) {
    double total = 0.0;
    for (double v : a.data()) total += v;
    Tensor out = Tensor::scalar(total);
    if (wants_grad(tape, a)) {
        out.set_requires_grad(true);
        Tensor ac = a, oc = out;
        tape->record([ac, oc]() mutable {
            if (!oc.has_grad() || !ac.requires_grad()) return;
            const double g = oc.grad()[0];
            auto& ag = ac.grad();
            for (double& v : ag) v += g;
        });
    }
    return out;
}

Tensor mean(Tape* tape, const Tensor& a) {
    if (a.size() == 0) throw ShapeError("mean: empty tensor");
    const double inv = 1.0 / static_cast<double>(a.size());
    double total = 0.0;
    for (double v : a.data()) total += v;
    Tensor out = Tensor::scalar(total * inv);
    if (wants_grad(tape, a)) {
        out.set_requires_grad(true);
        Tensor ac = a, oc = out;
        tape->record([ac, oc, inv]() mutable {
            if (!oc.has_grad() || !ac.requires_grad()) return;
            const double g = oc.grad()[0] * inv;
            auto& ag = ac.grad();
            for (double& v : ag) v += g;
        });
    }
    return out;
}

Tensor softmax_cross_entropy_ignore(Tape* tape, const Tensor& logits,
                                    const std::vector<TokenId>& targets,
                                    TokenId ignore_index, Reduction reduction) {
    require_matrix(logits, "softmax_cross_entropy_ignore");
    const Dim n = logits.rows(), v = logits.cols();
    if (static_cast<Dim>(targets.size()) != n) {
        throw ShapeError("softmax_cross_entropy_ignore: " +
                         std::to_string(targets.size()) + " targets for " +
                         shape_str(logits.shape()) + " logits");
    }
    std::vector<Dim> live;
    for (Dim i = 0; i < n; ++i) {
        TokenId t = targets[static_cast<std::size_t>(i)];
        if (t == ignore_index) continue;
        if (t < 0 || t >= v) {
            throw IndexError("softmax_cross_entropy_ignore: target " +
                             std::to_string(t) + " out of range [0, " +
                             std::to_string(v) + ")");
        }
        live.push_back(i);
    }
    if (live.empty()) {
        throw NoSupervisedTokens(
            "softmax_cross_entropy_ignore: every target equals the ignore "
            "index " + std::to_string(ignore_index));
    }
    const double norm = reduction == Reduction::Mean
                            ? 1.0 / static_cast<double>(live.size())
                            : 1.0;
    double total = 0.0;
    for (Dim i : live) {
        const double* row = logits.data().data() + i * v;
        double mx = row[0];
        for (Dim j = 1; j < v; ++j) mx = std::max(mx, row[j]);
        double denom = 0.0;
        for (Dim j = 0; j < v; ++j) denom += std::exp(row[j] - mx);
        const TokenId t = targets[static_cast<std::size_t>(i)];
        total += -(row[t] - mx - std::log(denom));
    }
    Tensor out = Tensor::scalar(total * norm);
    if (wants_grad(tape, logits)) {
        out.set_requires_grad(true);
        Tensor lc = logits, oc = out;
        std::vector<TokenId> tc = targets;
        tape->record([lc, oc, tc, live, norm, v]() mutable {
            if (!oc.has_grad() || !lc.requires_grad()) return;
            const double g = oc.grad()[0] * norm;
            auto& lg = lc.grad();
            for (Dim i : live) {
                const double* row = lc.data().data() + i * v;
                double mx = row[0];
                for (Dim j = 1; j < v; ++j) mx = std::max(mx, row[j]);
                double denom = 0.0;
                for (Dim j = 0; j < v; ++j) denom += std::exp(row[j] - mx);
                const TokenId t = tc[static_cast<std::size_t>(i)];
                for (Dim j = 0; j < v; ++j) {
                    double p = std::exp(row[j] - mx) / denom;
                    lg[i * v + j] += g * (p - (j == t ? 1.0 : 0.0));
                }
            }
        });
    }
    return out;
}

} // namespace weave::ops
