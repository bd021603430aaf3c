#include <cstdlib>
#include <cstring>

#include "histgbt/kernels.hpp"

namespace histgbt::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Backend resolve_backend() {
  if (const char* env = std::getenv("HISTGBT_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
    if (std::strcmp(env, "avx2") == 0 && backend_available(Backend::Avx2)) {
      return Backend::Avx2;
    }
    return Backend::Scalar;
  }
  return backend_available(Backend::Avx2) ? Backend::Avx2 : Backend::Scalar;
}

Backend g_backend = resolve_backend();

}  // namespace

bool backend_available(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if HISTGBT_HAVE_AVX2_TU
      return cpu_has_avx2();
#else
      return false;
#endif
  }
  return false;
}

const Ops& ops() {
#if HISTGBT_HAVE_AVX2_TU
  if (g_backend == Backend::Avx2) return detail::avx2_ops;
#endif
  return detail::scalar_ops;
}

Backend active_backend() { return g_backend; }

void force_backend(Backend backend) {
  g_backend = backend_available(backend) ? backend : Backend::Scalar;
}

const char* backend_name(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
  }
  return "scalar";
}

}  // namespace histgbt::kernels
