#pragma once

#include "dgprm/types.hpp"

namespace dgprm {

double dot(const EmbeddingVector& a, const EmbeddingVector& b);
double l2_norm(const EmbeddingVector& v);

/// 1 - (a.b)/(|a||b|), clamped into [0, 2].
/// Throws DimensionMismatch on unequal lengths, ZeroVector on a zero input.
double cosine_distance(const EmbeddingVector& a, const EmbeddingVector& b);

/// Unit-normalized copy. Throws ZeroVector when the norm vanishes.
EmbeddingVector normalize(const EmbeddingVector& v);

/// Rounds every component through IEEE-754 binary32. Embeddings stored in
/// a reward tree pass through this so the 4-byte-per-component tree file
/// round-trips bit-exactly.
EmbeddingVector quantize_f32(const EmbeddingVector& v);

/// Throws NonFiniteInput when any component is NaN or infinite.
void require_finite(const EmbeddingVector& v, const char* what);

} // namespace dgprm
