#pragma once

#include <string>
#include <vector>

#include "forge/source.hpp"

namespace forge::testing {

struct ToyKernel {
  std::string name;
  SourceUnit unit;
};

inline SourceUnit unit_of(const std::string& file, const std::string& code) {
  SourceUnit u;
  u.files.push_back({file, code});
  return u;
}

// Single loop TC=4 over one 1-D array of extent 4.
inline SourceUnit toy_loop_array() {
  return unit_of("toy.c",
                 "void toy(int a[4]) {\n"
                 "  for (int i = 0; i < 4; i++) {\n"
                 "    a[i] = a[i] + 1;\n"
                 "  }\n"
                 "}\n");
}

// Two perfectly nested TC=4 loops, no arrays.
inline SourceUnit toy_nested() {
  return unit_of("nest.c",
                 "int nest(int x) {\n"
                 "  int acc = 0;\n"
                 "  for (int i = 0; i < 4; i++) {\n"
                 "    for (int j = 0; j < 4; j++) {\n"
                 "      acc += i * j + x;\n"
                 "    }\n"
                 "  }\n"
                 "  return acc;\n"
                 "}\n");
}

inline std::vector<ToyKernel> toy_kernels() {
  std::vector<ToyKernel> k;
  k.push_back({"loop_array", toy_loop_array()});
  k.push_back({"nested", toy_nested()});
  k.push_back({"unbraced", unit_of("fill.c", "void fill(int a[8]) { for (int i = 0; i < 8; i++) a[i] = i; }\n")});
  k.push_back({"unbraced_nest",
               unit_of("mat.c",
                       "#define N 4\n"
                       "void mat(int m[N][N])\n"
                       "{\n"
                       "    for (int i = 0; i < N; i++)\n"
                       "        for (int j = 0; j < N; j++)\n"
                       "            m[i][j] = i + j;\n"
                       "}\n")});
  k.push_back({"helper",
               unit_of("scale.c",
                       "static int twice(int v) { return v * 2; }\n"
                       "\n"
                       "void scale(int in[8], int out[8]) {\n"
                       "  for (int i = 0; i < 8; i += 2) {\n"
                       "    out[i] = twice(in[i]);\n"
                       "    out[i + 1] = twice(in[i + 1]);\n"
                       "  }\n"
                       "}\n")});
  k.push_back({"global_local",
               unit_of("lut.c",
                       "const int lut[16] = {0, 1, 4, 9, 16, 25, 36, 49, 64, 81, 100, 121, 144, 169, 196, 225};\n"
                       "\n"
                       "void squares(int idx[8], int out[8]) {\n"
                       "  int tmp[8];\n"
                       "  for (int i = 0; i < 8; i++) {\n"
                       "    tmp[i] = lut[idx[i] & 15];\n"
                       "  }\n"
                       "  for (int i = 0; i < 8; i++) {\n"
                       "    out[i] = tmp[7 - i];\n"
                       "  }\n"
                       "}\n")});
  k.push_back({"comments",
               unit_of("sum.c",
                       "// running sums\n"
                       "void sum(int a[16], int s[1]) { // entry\n"
                       "  int t = 0;\n"
                       "  acc: for (int i = 0; i < 16; i++) { // main loop\n"
                       "    t += a[i];\n"
                       "  }\n"
                       "  s[0] = t;\n"
                       "}\n")});
  k.push_back({"unknown_bound",
               unit_of("copy.c",
                       "void copy(int dst[32], int src[32], int n) {\n"
                       "  for (int i = 0; i < n; i++) {\n"
                       "    dst[i] = src[i];\n"
                       "  }\n"
                       "  for (int i = 0; i < 32; i += 8) { dst[i] = 0; }\n"
                       "}\n")});
  k.push_back({"gemm2",
               unit_of("mm.c",
                       "#define M 4\n"
                       "void mm(int A[M][M], int B[M][M], int C[M][M]) {\n"
                       "  row: for (int i = 0; i < M; i++) {\n"
                       "    col: for (int j = 0; j < M; j++) {\n"
                       "      int acc = 0;\n"
                       "      for (int k = 0; k < M; k++)\n"
                       "        acc += A[i][k] * B[k][j];\n"
                       "      C[i][j] = acc;\n"
                       "    }\n"
                       "  }\n"
                       "}\n")});
  k.push_back({"two_files",
               [] {
                 SourceUnit u;
                 u.files.push_back({"filt.h", "#define TAPS 4\nint tap(int c, int x);\n"});
                 u.files.push_back({"filt.c",
                                    "#include \"filt.h\"\n"
                                    "int tap(int c, int x) { return c * x; }\n"
                                    "void fir(int x[16], int y[16]) {\n"
                                    "  int coef[TAPS] = {1, 2, 3, 4}; /* taps */\n"
                                    "  for (int n = 0; n < 16; n++) { /* outputs */\n"
                                    "    int acc = 0;\n"
                                    "    for (int t = 0; t < TAPS; t++) {\n"
                                    "      acc += tap(coef[t], x[(n + t) & 15]);\n"
                                    "    }\n"
                                    "    y[n] = acc;\n"
                                    "  }\n"
                                    "}\n"});
                 return u;
               }()});
  return k;
}

}  // namespace forge::testing
