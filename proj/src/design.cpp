#include "mmsk/design.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <set>

#include "mmsk/error.hpp"
#include "mmsk/random.hpp"

namespace mmsk {

Mixture::Mixture(std::vector<int> constituents) : constituents_(std::move(constituents)) {
    if (constituents_.empty()) throw Error("empty mixture");
    std::sort(constituents_.begin(), constituents_.end());
    if (std::adjacent_find(constituents_.begin(), constituents_.end()) != constituents_.end())
        throw Error("duplicate mixture constituent");
    if (constituents_.front() < 0) throw Error("negative molecule index");
}

bool Mixture::contains(int molecule) const {
    return std::binary_search(constituents_.begin(), constituents_.end(), molecule);
}

Eigen::VectorXd mixture_expected_concentration(const Mixture& mix, double x_bar_mix, int molecules) {
    if (mix.size() == 0) throw Error("empty mixture");
    if (!(x_bar_mix > 0.0)) throw Error("x_bar_mix must be positive");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(molecules);
    const double share = x_bar_mix / static_cast<double>(mix.size());
    for (int q : mix.constituents()) {
        if (q >= molecules) throw Error("molecule index out of range");
        out[q] = share;
    }
    return out;
}

namespace {

std::uint64_t mixture_key(const Mixture& mix) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int q : mix.constituents()) {
        h ^= static_cast<std::uint64_t>(q) + 1;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Metric values compared after rounding to 1e-9 dB.
long long rank_key(double v) {
    if (std::isnan(v) || v == -std::numeric_limits<double>::infinity()) return LLONG_MIN;
    if (v == std::numeric_limits<double>::infinity()) return LLONG_MAX;
    return std::llround(v * 1e9);
}

}  // namespace

Eigen::MatrixXd mixture_response_samples(const AffinityMatrix& a, const Mixture& mix,
                                         const ReceptionConfig& cfg, const MetricSettings& s) {
    if (s.realizations < 2) throw Error("at least two realisations required");
    const Eigen::VectorXd mean =
        mixture_expected_concentration(mix, s.x_bar_mix, static_cast<int>(a.molecules()));
    Rng rng(derive_seed(s.seed, mixture_key(mix)));
    const auto& A = a.values();
    Eigen::MatrixXd y(a.receptors(), s.realizations);
    Eigen::VectorXd pre(a.receptors());
    for (int i = 0; i < s.realizations; ++i) {
        pre.setZero();
        for (int q : mix.constituents())
            pre += static_cast<double>(rng.poisson(mean[q])) * A.col(q);
        for (Eigen::Index r = 0; r < pre.size(); ++r)
            y(r, i) = relu(pre[r] + static_cast<double>(rng.poisson(cfg.noise_mean)), cfg.threshold);
    }
    return y;
}

double dissimilarity_from_samples(const Eigen::MatrixXd& y1, const Eigen::MatrixXd& y2) {
    if (y1.rows() != y2.rows()) throw Error("dimension mismatch");
    if (y1.cols() < 2 || y2.cols() < 2) throw Error("at least two realisations required");
    const Eigen::VectorXd diff = y1.rowwise().mean() - y2.rowwise().mean();
    const double dist2 = diff.squaredNorm();
    if (dist2 < 1e-12) return -std::numeric_limits<double>::infinity();
    const Eigen::VectorXd p = diff / std::sqrt(dist2);
    auto projected_variance = [&p](const Eigen::MatrixXd& y) {
        const Eigen::RowVectorXd proj = p.transpose() * y;
        const double mean = proj.mean();
        return (proj.array() - mean).square().sum() / static_cast<double>(proj.size() - 1);
    };
    const double denom = projected_variance(y1) + projected_variance(y2);
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(dist2 / denom);
}

double dissimilarity(const AffinityMatrix& a, const Mixture& m1, const Mixture& m2,
                     const ReceptionConfig& cfg, const MetricSettings& s) {
    if (m1 == m2) throw Error("dissimilarity requires two different mixtures");
    return dissimilarity_from_samples(mixture_response_samples(a, m1, cfg, s),
                                      mixture_response_samples(a, m2, cfg, s));
}

DissimilarityTable fill_dissimilarity_table(const AffinityMatrix& a, std::vector<Mixture> mixtures,
                                            const ReceptionConfig& cfg, const MetricSettings& s) {
    const auto n = static_cast<Eigen::Index>(mixtures.size());
    std::vector<Eigen::MatrixXd> samples;
    samples.reserve(mixtures.size());
    for (const auto& m : mixtures) samples.push_back(mixture_response_samples(a, m, cfg, s));

    DissimilarityTable t;
    t.values = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
    t.std_error = t.values;
    t.realizations = s.realizations;
    t.seed = s.seed;

    const int batches = std::max(2, s.batches);
    const int per_batch = s.realizations / batches;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = dissimilarity_from_samples(samples[static_cast<std::size_t>(i)],
                                                        samples[static_cast<std::size_t>(j)]);
            t.values(i, j) = t.values(j, i) = d;
            double se = std::numeric_limits<double>::quiet_NaN();
            if (per_batch >= 2) {
                Eigen::VectorXd part(batches);
                for (int b = 0; b < batches; ++b)
                    part[b] = dissimilarity_from_samples(
                        samples[static_cast<std::size_t>(i)].middleCols(b * per_batch, per_batch),
                        samples[static_cast<std::size_t>(j)].middleCols(b * per_batch, per_batch));
                if (part.allFinite()) {
                    const double mu = part.mean();
                    const double sd = std::sqrt((part.array() - mu).square().sum() / (batches - 1));
                    se = sd / std::sqrt(static_cast<double>(batches));
                }
            }
            t.std_error(i, j) = t.std_error(j, i) = se;
        }
    }
    t.mixtures = std::move(mixtures);
    return t;
}

std::vector<Mixture> enumerate_mixtures(const std::vector<int>& molecules, int max_size) {
    std::vector<int> pool = molecules;
    std::sort(pool.begin(), pool.end());
    const int n = static_cast<int>(pool.size());
    std::vector<Mixture> out;
    for (int size = 1; size <= std::min(max_size, n); ++size) {
        std::vector<int> idx(static_cast<std::size_t>(size));
        for (int i = 0; i < size; ++i) idx[static_cast<std::size_t>(i)] = i;
        for (;;) {
            std::vector<int> members;
            for (int i : idx) members.push_back(pool[static_cast<std::size_t>(i)]);
            out.emplace_back(std::move(members));
            int pos = size - 1;
            while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - size + pos) --pos;
            if (pos < 0) break;
            ++idx[static_cast<std::size_t>(pos)];
            for (int i = pos + 1; i < size; ++i)
                idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
        }
    }
    return out;
}

std::vector<Mixture> singletons(int molecules) {
    std::vector<Mixture> out;
    for (int q = 0; q < molecules; ++q) out.emplace_back(std::vector<int>{q});
    return out;
}

std::vector<std::vector<int>> allocate_molecules(const DissimilarityTable& table, int transmitters,
                                                 int per_transmitter) {
    const std::size_t n = table.size();
    if (transmitters < 1) throw Error("at least one transmitter required");
    if (per_transmitter < 2) throw Error("each transmitter needs at least two molecules");
    if (static_cast<std::size_t>(transmitters) * static_cast<std::size_t>(per_transmitter) > n)
        throw Error("insufficient molecules");
    for (const auto& m : table.mixtures)
        if (m.size() != 1) throw Error("allocation requires a singleton table");

    std::vector<bool> free(n, true);
    std::vector<std::vector<std::size_t>> sets(static_cast<std::size_t>(transmitters));

    for (auto& set : sets) {
        long long best = LLONG_MIN;
        std::size_t bi = n, bj = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (!free[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!free[j]) continue;
                const long long key = rank_key(table(i, j));
                if (bi == n || key > best) {
                    best = key;
                    bi = i;
                    bj = j;
                }
            }
        }
        set = {bi, bj};
        free[bi] = free[bj] = false;
    }

    auto unfilled = [&] {
        return std::any_of(sets.begin(), sets.end(), [&](const auto& s) {
            return static_cast<int>(s.size()) < per_transmitter;
        });
    };
    while (unfilled()) {
        long long best = LLONG_MIN;
        std::size_t bk = sets.size(), bq = n;
        for (std::size_t k = 0; k < sets.size(); ++k) {
            if (static_cast<int>(sets[k].size()) >= per_transmitter) continue;
            for (std::size_t q = 0; q < n; ++q) {
                if (!free[q]) continue;
                double worst = std::numeric_limits<double>::infinity();
                for (std::size_t member : sets[k]) worst = std::min(worst, table(q, member));
                const long long key = rank_key(worst);
                if (bk == sets.size() || key > best) {
                    best = key;
                    bk = k;
                    bq = q;
                }
            }
        }
        sets[bk].push_back(bq);
        free[bq] = false;
    }

    std::vector<std::vector<int>> out;
    for (const auto& s : sets) {
        std::vector<int> molecules;
        for (std::size_t i : s) molecules.push_back(table.mixtures[i].constituents().front());
        std::sort(molecules.begin(), molecules.end());
        out.push_back(std::move(molecules));
    }
    return out;
}

Alphabet build_alphabet(const DissimilarityTable& table, double d_thr) {
    Alphabet out;
    const std::size_t n = table.size();
    if (n < 2) return out;

    long long best = LLONG_MIN;
    std::size_t bi = n, bj = n;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const long long key = rank_key(table(i, j));
            if (bi == n || key > best) {
                best = key;
                bi = i;
                bj = j;
            }
        }
    if (table(bi, bj) < d_thr) return out;
    out.order = {bi, bj};
    out.min_metric = {std::numeric_limits<double>::quiet_NaN(), table(bi, bj)};

    std::vector<bool> used(n, false);
    used[bi] = used[bj] = true;
    double current_min = table(bi, bj);
    while (out.order.size() < n) {
        long long bkey = LLONG_MIN;
        std::size_t bm = n;
        double bval = -std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < n; ++m) {
            if (used[m]) continue;
            double worst = std::numeric_limits<double>::infinity();
            for (std::size_t member : out.order) worst = std::min(worst, table(m, member));
            const long long key = rank_key(worst);
            if (bm == n || key > bkey) {
                bkey = key;
                bm = m;
                bval = worst;
            }
        }
        if (bval < d_thr) break;
        used[bm] = true;
        out.order.push_back(bm);
        current_min = std::min(current_min, bval);
        out.min_metric.push_back(current_min);
    }
    return out;
}

bool is_distinguishable(const DissimilarityTable& table, const std::vector<std::size_t>& members,
                        double d_thr) {
    for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t j = i + 1; j < members.size(); ++j)
            if (table(members[i], members[j]) < d_thr) return false;
    return true;
}

Eigen::MatrixXd build_construction_matrix(const std::vector<std::vector<Mixture>>& alphabets,
                                          int molecules) {
    Eigen::Index total = 0;
    for (const auto& a : alphabets) total += static_cast<Eigen::Index>(a.size());
    if (total == 0) throw Error("empty alphabets");
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(molecules, total);
    Eigen::Index col = 0;
    for (const auto& alphabet : alphabets)
        for (const auto& mix : alphabet) {
            for (int q : mix.constituents()) {
                if (q >= molecules) throw Error("molecule index out of range");
                c(q, col) = 1.0 / static_cast<double>(mix.size());
            }
            ++col;
        }
    return c;
}

Eigen::MatrixXd build_reception_matrix(const Eigen::MatrixXd& construction,
                                       const std::vector<double>& gammas) {
    if (static_cast<Eigen::Index>(gammas.size()) != construction.rows())
        throw Error("one gamma per molecule type required");
    for (double g : gammas)
        if (!(g > 0.0)) throw Error("gamma must be positive");
    Eigen::MatrixXd r = construction;
    for (Eigen::Index q = 0; q < r.rows(); ++q) r.row(q) *= gammas[static_cast<std::size_t>(q)];
    for (Eigen::Index m = 0; m < r.cols(); ++m) {
        const double total = r.col(m).sum();
        if (!(total > 0.0)) throw Error("mixture invisible at receiver");
        r.col(m) /= total;
    }
    return r;
}

int MixtureBook::mixture_count() const {
    int n = 0;
    for (const auto& a : alphabets) n += static_cast<int>(a.size());
    return n;
}

int MixtureBook::owner(int mixture) const {
    int offset = 0;
    for (std::size_t k = 0; k < alphabets.size(); ++k) {
        offset += static_cast<int>(alphabets[k].size());
        if (mixture < offset) return static_cast<int>(k);
    }
    throw Error("mixture index out of range");
}

std::vector<int> MixtureBook::columns_of(int transmitter) const {
    int offset = 0;
    for (int k = 0; k < transmitter; ++k) offset += static_cast<int>(alphabets[static_cast<std::size_t>(k)].size());
    std::vector<int> cols;
    for (std::size_t i = 0; i < alphabets.at(static_cast<std::size_t>(transmitter)).size(); ++i)
        cols.push_back(offset + static_cast<int>(i));
    return cols;
}

const Mixture& MixtureBook::mixture(int global) const {
    const int k = owner(global);
    const int first = columns_of(k).front();
    return alphabets[static_cast<std::size_t>(k)][static_cast<std::size_t>(global - first)];
}

void MixtureBook::check() const {
    if (allocations.size() != alphabets.size()) throw Error("one allocation per alphabet required");
    std::set<int> seen;
    std::size_t total = 0;
    for (const auto& set : allocations) {
        seen.insert(set.begin(), set.end());
        total += set.size();
    }
    if (seen.size() != total) throw Error("molecule allocations overlap");
    for (std::size_t k = 0; k < alphabets.size(); ++k)
        for (const auto& mix : alphabets[k])
            for (int q : mix.constituents())
                if (std::find(allocations[k].begin(), allocations[k].end(), q) == allocations[k].end())
                    throw Error("mixture uses a molecule outside its transmitter's set");
    for (const Eigen::MatrixXd* m : {&construction, &reception}) {
        if (m->cols() != mixture_count()) throw Error("matrix width does not match alphabets");
        if ((m->array() < 0.0).any()) throw Error("negative mixture fraction");
        for (Eigen::Index c = 0; c < m->cols(); ++c)
            if (std::fabs(m->col(c).sum() - 1.0) > 1e-12) throw Error("mixture column does not sum to one");
    }
}

MixtureBook make_book(std::vector<std::vector<int>> allocations,
                      std::vector<std::vector<Mixture>> alphabets,
                      const std::vector<ChannelResponse>& channels, double x_bar_mix) {
    MixtureBook book;
    book.allocations = std::move(allocations);
    book.alphabets = std::move(alphabets);
    const int q = static_cast<int>(channels.size());
    book.construction = build_construction_matrix(book.alphabets, q);
    std::vector<double> gammas;
    for (const auto& ch : channels) gammas.push_back(ch.gamma);
    book.reception = build_reception_matrix(book.construction, gammas);
    book.x_bar_mix = x_bar_mix;
    book.check();
    return book;
}

DesignResult run_design(const AffinityMatrix& a, const ReceptionConfig& cfg, const DesignParams& p) {
    if (p.metric.realizations < 1000) throw Error("at least 1000 Monte Carlo realisations required");
    DesignResult out;
    out.singleton_table =
        fill_dissimilarity_table(a, singletons(static_cast<int>(a.molecules())), cfg, p.metric);
    out.allocations = allocate_molecules(out.singleton_table, p.transmitters, p.per_transmitter);
    for (const auto& set : out.allocations) {
        out.mixture_tables.push_back(
            fill_dissimilarity_table(a, enumerate_mixtures(set, p.max_mix), cfg, p.metric));
        out.alphabets.push_back(build_alphabet(out.mixture_tables.back(), p.d_thr));
    }
    return out;
}

MixtureBook book_from_design(const DesignResult& design, int alphabet_size,
                             const std::vector<ChannelResponse>& channels, double x_bar_mix) {
    std::vector<std::vector<Mixture>> alphabets;
    for (std::size_t k = 0; k < design.alphabets.size(); ++k) {
        const auto& order = design.alphabets[k].order;
        if (static_cast<int>(order.size()) < alphabet_size)
            throw Error("alphabet smaller than requested size");
        std::vector<Mixture> chosen;
        for (int i = 0; i < alphabet_size; ++i)
            chosen.push_back(design.mixture_tables[k].mixtures[order[static_cast<std::size_t>(i)]]);
        alphabets.push_back(std::move(chosen));
    }
    return make_book(design.allocations, std::move(alphabets), channels, x_bar_mix);
}

}  // namespace mmsk
