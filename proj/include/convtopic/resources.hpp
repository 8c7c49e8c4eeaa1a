#ifndef CONVTOPIC_RESOURCES_HPP
#define CONVTOPIC_RESOURCES_HPP

// Bundled word lists, compiled in from data/.
namespace convtopic::resources {

const char* stopwords();
const char* abbreviations();
const char* cuewords();
const char* lexicon();

}  // namespace convtopic::resources

#endif  // CONVTOPIC_RESOURCES_HPP
