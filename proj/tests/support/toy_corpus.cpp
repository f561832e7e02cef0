#include "toy_corpus.hpp"

#include <cctype>

#include "steer/decoding/rng.hpp"

namespace steer::testkit {

namespace {

struct Grammar {
  std::vector<std::string> subjects;
  std::vector<std::string> verbs;
  std::vector<std::string> objects;
  std::vector<std::string> tails;
};

const Grammar& astronomy() {
  static const Grammar g{
      {"the pulsar", "a red giant", "the nebula", "a quasar", "the comet", "a white dwarf",
       "the galaxy", "a neutron star", "the accretion disk", "a brown dwarf", "the binary system",
       "a supernova remnant"},
      {"emits", "absorbs", "orbits", "eclipses", "outshines", "collapses toward", "drifts past",
       "heats", "ionizes", "distorts"},
      {"a dim companion", "the cold dust lane", "its magnetic field", "the inner halo",
       "a faint corona", "the hydrogen cloud", "the orbital plane", "a spiral arm",
       "the event horizon", "a stellar wind"},
      {"every few hours", "at radio wavelengths", "in the infrared", "near the galactic core",
       "over many millennia", "with steady brightness", "beyond the ecliptic",
       "during each transit", "along the jet axis"}};
  return g;
}

const Grammar& everyday() {
  static const Grammar g{
      {"the farmer", "a teacher", "the old dog", "my neighbour", "a small child", "the baker",
       "the bus driver", "our postman", "a tired nurse", "the shopkeeper"},
      {"carries", "paints", "buys", "cleans", "opens", "fixes", "sells", "borrows", "washes"},
      {"a wooden chair", "the kitchen door", "fresh bread", "a blue bicycle", "the garden fence",
       "some apples", "an umbrella", "the front window", "a paper bag"},
      {"on sunday morning", "after lunch", "in the village", "before the rain", "with great care",
       "every week", "at the market", "for a friend"}};
  return g;
}

const Grammar& kitchen() {
  static const Grammar g{
      {"the chef", "a cook", "my aunt", "the waiter", "a butcher", "the pastry maker"},
      {"stirs", "bakes", "slices", "roasts", "seasons", "grills", "whisks"},
      {"the onion soup", "a lemon tart", "some garlic", "the pork belly", "a bowl of rice",
       "the tomato sauce", "a crusty loaf"},
      {"in a hot pan", "for dinner", "with fresh herbs", "until golden", "on a low flame",
       "for the guests"}};
  return g;
}

std::string sentence(const Grammar& g, decoding::Xoshiro256& rng) {
  auto pick = [&](const std::vector<std::string>& v) -> const std::string& {
    return v[rng.below(v.size())];
  };
  std::string s = pick(g.subjects) + " " + pick(g.verbs) + " " + pick(g.objects) + " " +
                  pick(g.tails) + ".";
  s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::vector<std::string> fill(const Grammar& g, std::size_t bytes, std::uint64_t seed) {
  decoding::Xoshiro256 rng(seed);
  std::vector<std::string> out;
  std::size_t total = 0;
  while (total < bytes) {
    out.push_back(sentence(g, rng));
    total += out.back().size() + 1;
  }
  return out;
}

}  // namespace

std::vector<std::string> astronomy_sentences(std::size_t bytes, std::uint64_t seed) {
  return fill(astronomy(), bytes, seed);
}

std::vector<std::string> everyday_sentences(std::size_t bytes, std::uint64_t seed) {
  return fill(everyday(), bytes, seed);
}

std::vector<std::string> kitchen_sentences(std::size_t count, std::uint64_t seed) {
  decoding::Xoshiro256 rng(seed);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(sentence(kitchen(), rng));
  return out;
}

pipeline::Dataset as_dataset(const std::vector<std::string>& texts) {
  pipeline::Dataset d;
  for (std::size_t i = 0; i < texts.size(); ++i) d.add({pipeline::padded_id(i), texts[i], {}, {}});
  return d;
}

pipeline::Dataset labeled_corpus(std::size_t per_label, std::uint64_t seed) {
  decoding::Xoshiro256 rng(seed);
  pipeline::Dataset d;
  for (std::size_t i = 0; i < 2 * per_label; ++i) {
    const bool space = i % 2 == 0;
    d.add({pipeline::padded_id(i), sentence(space ? astronomy() : kitchen(), rng),
           std::string(space ? "space" : "kitchen"), {}});
  }
  return d;
}

}  // namespace steer::testkit
