#ifndef CONVTOPIC_PORTER_HPP
#define CONVTOPIC_PORTER_HPP

#include <string>
#include <string_view>

namespace convtopic {

/// Porter (1980) suffix-stripping stemmer. Input is lowercased first; words
/// of length <= 2 and words containing non-letters are returned lowercased
/// but otherwise untouched.
std::string porter_stem(std::string_view word);

}  // namespace convtopic

#endif  // CONVTOPIC_PORTER_HPP
