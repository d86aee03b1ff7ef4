#include "dgprm/geometry.hpp"

#include "dgprm/errors.hpp"

#include <cmath>
#include <string>

namespace dgprm {

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("dot: lengths " + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()));
    }
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double l2_norm(const EmbeddingVector& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double cosine_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
    const double num = dot(a, b);
    const double na = l2_norm(a);
    const double nb = l2_norm(b);
    if (na == 0.0 || nb == 0.0) throw ZeroVector("cosine_distance: zero-norm input");
    double d = 1.0 - num / (na * nb);
    if (d < 0.0) d = 0.0;
    if (d > 2.0) d = 2.0;
    return d;
}

EmbeddingVector normalize(const EmbeddingVector& v) {
    const double n = l2_norm(v);
    if (n == 0.0) throw ZeroVector("normalize: zero-norm input");
    EmbeddingVector out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
    return out;
}

EmbeddingVector quantize_f32(const EmbeddingVector& v) {
    EmbeddingVector out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = static_cast<double>(static_cast<float>(v[i]));
    return out;
}

void require_finite(const EmbeddingVector& v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw NonFiniteInput(std::string(what) + ": non-finite component");
    }
}

} // namespace dgprm
