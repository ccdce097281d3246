// AVX2 variant of the trace likelihood kernel: four parameter vectors per
// pass, one lane each. The Q recursion and softmax mirror the scalar
// reference op-for-op; exp/log use the fdlibm reductions vectorized, so
// lanes agree with the reference to a few ulp per step.

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include <cmath>
#include <limits>

#include "qlfit/kernels/nll_kernel.hpp"

namespace qlfit::kernels {

namespace {

inline __m256d mul_add(__m256d a, __m256d b, __m256d c) {
  return _mm256_fmadd_pd(a, b, c);
}

// exp(x), fdlibm reduction: x = k*ln2 + r, exp(r) via the rational
// approximation r*c/(2-c), then scale by 2^k in two steps so results
// stay exact down into the denormal range.
inline __m256d vexp(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.44269504088896338700e+00);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d P1 = _mm256_set1_pd(1.66666666666666019037e-01);
  const __m256d P2 = _mm256_set1_pd(-2.77777777770155933842e-03);
  const __m256d P3 = _mm256_set1_pd(6.61375632143793436117e-05);
  const __m256d P4 = _mm256_set1_pd(-1.65339022054652515390e-06);
  const __m256d P5 = _mm256_set1_pd(4.13813679705723846039e-08);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);

  const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  const __m256d hi = _mm256_fnmadd_pd(k, ln2_hi, x);
  const __m256d lo = _mm256_mul_pd(k, ln2_lo);
  const __m256d r = _mm256_sub_pd(hi, lo);

  const __m256d t = _mm256_mul_pd(r, r);
  __m256d c = mul_add(t, P5, P4);
  c = mul_add(t, c, P3);
  c = mul_add(t, c, P2);
  c = mul_add(t, c, P1);
  c = _mm256_sub_pd(r, _mm256_mul_pd(t, c));
  const __m256d rc = _mm256_div_pd(_mm256_mul_pd(r, c), _mm256_sub_pd(two, c));
  const __m256d y = _mm256_sub_pd(one, _mm256_sub_pd(_mm256_sub_pd(lo, rc), hi));

  // 2^k = 2^k1 * 2^k2 with k1 >= -1000 so both factors are normal.
  const __m256d k1 = _mm256_max_pd(k, _mm256_set1_pd(-1000.0));
  const __m256d k2 = _mm256_sub_pd(k, k1);
  auto pow2 = [](__m256d e) {
    const __m128i e32 = _mm256_cvtpd_epi32(e);
    const __m256i e64 = _mm256_cvtepi32_epi64(e32);
    const __m256i bits =
        _mm256_slli_epi64(_mm256_add_epi64(e64, _mm256_set1_epi64x(1023)), 52);
    return _mm256_castsi256_pd(bits);
  };
  __m256d result = _mm256_mul_pd(_mm256_mul_pd(y, pow2(k1)), pow2(k2));

  const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  const __m256d overflow = _mm256_cmp_pd(x, _mm256_set1_pd(709.782712893384), _CMP_GT_OQ);
  const __m256d underflow = _mm256_cmp_pd(x, _mm256_set1_pd(-745.2), _CMP_LT_OQ);
  result = _mm256_blendv_pd(result, inf, overflow);
  result = _mm256_blendv_pd(result, _mm256_setzero_pd(), underflow);
  return result;
}

// log(x) for x >= 0, fdlibm reduction: x = 2^e * m with m in
// [sqrt(1/2), sqrt(2)), log(m) from the atanh series in s = (m-1)/(m+1).
inline __m256d vlog(__m256d x) {
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d Lg1 = _mm256_set1_pd(6.666666666666735130e-01);
  const __m256d Lg2 = _mm256_set1_pd(3.999999999940941908e-01);
  const __m256d Lg3 = _mm256_set1_pd(2.857142874366239149e-01);
  const __m256d Lg4 = _mm256_set1_pd(2.222219843214978396e-01);
  const __m256d Lg5 = _mm256_set1_pd(1.818357216161805012e-01);
  const __m256d Lg6 = _mm256_set1_pd(1.531383769920937332e-01);
  const __m256d Lg7 = _mm256_set1_pd(1.479819860511658591e-01);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d half = _mm256_set1_pd(0.5);

  // Denormal inputs are pushed into the normal range first.
  const __m256d tiny_bound = _mm256_set1_pd(0x1.0p-1022);
  const __m256d is_denormal = _mm256_cmp_pd(x, tiny_bound, _CMP_LT_OQ);
  const __m256d scaled = _mm256_mul_pd(x, _mm256_set1_pd(0x1.0p54));
  x = _mm256_blendv_pd(x, scaled, is_denormal);
  __m256d e_bias = _mm256_and_pd(is_denormal, _mm256_set1_pd(-54.0));

  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i exp_bits = _mm256_srli_epi64(bits, 52);
  // e as double via the 1.5*2^52 integer-in-double trick.
  const __m256i magic = _mm256_set1_epi64x(0x4338000000000000ll);
  const __m256d e_raw = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_add_epi64(
          _mm256_sub_epi64(exp_bits, _mm256_set1_epi64x(1023)), magic)),
      _mm256_set1_pd(0x1.8p52));

  const __m256i mant_bits = _mm256_or_si256(
      _mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFll)),
      _mm256_set1_epi64x(0x3FF0000000000000ll));
  __m256d m = _mm256_castsi256_pd(mant_bits);  // in [1, 2)

  const __m256d sqrt2 = _mm256_set1_pd(1.41421356237309514547462185873883);
  const __m256d fold = _mm256_cmp_pd(m, sqrt2, _CMP_GE_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, half), fold);
  __m256d e = _mm256_add_pd(_mm256_add_pd(e_raw, _mm256_and_pd(fold, one)), e_bias);

  const __m256d f = _mm256_sub_pd(m, one);
  const __m256d hfsq = _mm256_mul_pd(half, _mm256_mul_pd(f, f));
  const __m256d s = _mm256_div_pd(f, _mm256_add_pd(_mm256_set1_pd(2.0), f));
  const __m256d z = _mm256_mul_pd(s, s);
  const __m256d w = _mm256_mul_pd(z, z);
  const __m256d t1 = _mm256_mul_pd(w, mul_add(w, mul_add(w, Lg6, Lg4), Lg2));
  const __m256d t2 = _mm256_mul_pd(z, mul_add(w, mul_add(w, mul_add(w, Lg7, Lg5), Lg3), Lg1));
  const __m256d R = _mm256_add_pd(t2, t1);

  const __m256d s_term = mul_add(s, _mm256_add_pd(hfsq, R), _mm256_mul_pd(e, ln2_lo));
  __m256d result = _mm256_sub_pd(
      _mm256_mul_pd(e, ln2_hi),
      _mm256_sub_pd(_mm256_sub_pd(hfsq, s_term), f));

  const __m256d neg_inf = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  const __m256d zero_mask = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_EQ_OQ);
  const __m256d nan = _mm256_set1_pd(std::numeric_limits<double>::quiet_NaN());
  const __m256d neg_mask = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_LT_OQ);
  result = _mm256_blendv_pd(result, neg_inf, zero_mask);
  result = _mm256_blendv_pd(result, nan, neg_mask);
  return result;
}

inline __m256d max3(__m256d a, __m256d b, __m256d c) {
  return _mm256_max_pd(a, _mm256_max_pd(b, c));
}

void nll_quad(const SellTrace& trace, const ParamPoint* pts, double* out) {
  const __m256d alpha = _mm256_setr_pd(pts[0].alpha, pts[1].alpha, pts[2].alpha, pts[3].alpha);
  const __m256d beta = _mm256_setr_pd(pts[0].beta, pts[1].beta, pts[2].beta, pts[3].beta);
  const __m256d gamma = _mm256_setr_pd(pts[0].gamma, pts[1].gamma, pts[2].gamma, pts[3].gamma);

  __m256d q[2][3];
  for (auto& row : q)
    for (auto& cell : row) cell = _mm256_setzero_pd();
  __m256d nll = _mm256_setzero_pd();

  const size_t n = trace.size();
  for (size_t t = 0; t < n; ++t) {
    const int s = trace.state_before[t];
    const int a = trace.action[t];
    const int s_next = trace.state_after[t];

    __m256d* row = q[s];
    const __m256d m = max3(row[0], row[1], row[2]);
    const __m256d e0 = vexp(_mm256_mul_pd(_mm256_sub_pd(row[0], m), beta));
    const __m256d e1 = vexp(_mm256_mul_pd(_mm256_sub_pd(row[1], m), beta));
    const __m256d e2 = vexp(_mm256_mul_pd(_mm256_sub_pd(row[2], m), beta));
    const __m256d z = _mm256_add_pd(e0, _mm256_add_pd(e1, e2));
    const __m256d chosen = a == 0 ? e0 : a == 1 ? e1 : e2;
    nll = _mm256_sub_pd(nll, vlog(_mm256_div_pd(chosen, z)));

    const __m256d* next_row = q[s_next];
    const __m256d next_best = max3(next_row[0], next_row[1], next_row[2]);
    const __m256d target = _mm256_add_pd(_mm256_set1_pd(trace.reward[t]),
                                         _mm256_mul_pd(gamma, next_best));
    const __m256d td = _mm256_sub_pd(target, row[a]);
    row[a] = _mm256_add_pd(row[a], _mm256_mul_pd(alpha, td));
  }

  // Non-finite lanes (NaN included) are reported as +inf, like the
  // scalar reference.
  const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7FFFFFFFFFFFFFFFll));
  const __m256d finite = _mm256_cmp_pd(_mm256_and_pd(nll, abs_mask), inf, _CMP_LT_OQ);
  nll = _mm256_blendv_pd(inf, nll, finite);

  _mm256_storeu_pd(out, nll);
}

}  // namespace

void nll_batch_avx2(const SellTrace& trace, const ParamPoint* points, size_t n,
                    double* out) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4) nll_quad(trace, points + i, out + i);
  if (i < n) {
    // Pad the tail with the last point so every result takes the same path.
    ParamPoint padded[4];
    double result[4];
    for (size_t j = 0; j < 4; ++j) padded[j] = points[std::min(i + j, n - 1)];
    nll_quad(trace, padded, result);
    for (size_t j = 0; i + j < n; ++j) out[i + j] = result[j];
  }
}

}  // namespace qlfit::kernels

#endif  // x86
