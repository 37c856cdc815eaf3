#pragma once

#include <string>

#include "gapprobe/error.hpp"

namespace gapprobe::testing {

inline std::string source_path(const std::string& rel) {
  return std::string(GAPPROBE_SOURCE_DIR) + "/" + rel;
}
inline std::string fixture_path(const std::string& name) {
  return source_path("tests/fixtures/" + name);
}
inline std::string gpt2_dir() { return source_path("data/gpt2"); }

inline constexpr const char* kExampleCsv =
    "sentence_type,item_id,condition,full_sentence\n"
    "subject_pg,1,PFPG,I know who the story about is likely to amuse soon.\n"
    "subject_pg,1,MFPG,I know that the story about Mary is likely to amuse soon.\n"
    "subject_pg,1,PFMG,I know who the story about is likely to amuse Anna soon.\n"
    "subject_pg,1,MFMG,I know that the story about Mary is likely to amuse Anna soon.\n";

}  // namespace gapprobe::testing

/// Asserts that stmt throws gapprobe::Error of the given kind.
#define EXPECT_GP_ERROR(stmt, error_kind)                                        \
  do {                                                                           \
    try {                                                                        \
      stmt;                                                                      \
      ADD_FAILURE() << "expected " << gapprobe::error_kind_name(error_kind);     \
    } catch (const gapprobe::Error& e_) {                                        \
      EXPECT_EQ(e_.kind(), error_kind) << e_.what();                             \
    }                                                                            \
  } while (0)
