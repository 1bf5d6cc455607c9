#include "nam/checkpoint.hpp"

#include <fstream>

#include "binary_io.hpp"

namespace nam {

namespace {

constexpr char kMagic[8] = {'N', 'A', 'M', 'M', 'D', 'L', '1', '\n'};

void put_string_list(std::ostream& out, const std::vector<std::string>& list) {
  detail::put_u32(out, static_cast<uint32_t>(list.size()));
  for (const auto& s : list) detail::put_string(out, s);
}

}  // namespace

void save_model(const std::string& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file: " + path);
  out.write(kMagic, sizeof kMagic);
  detail::put_f64(out, model.threshold);
  put_string_list(out, model.vocab.entities());
  put_string_list(out, model.vocab.relations());
  put_string_list(out, model.vocab.words());
  detail::put_params(out, model.params);
  if (!out) throw DataError("failed writing model file: " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw DataError("not a model file: " + path);
  }
  Model model;
  model.threshold = detail::get_f64(in);
  uint32_t n = detail::get_u32(in);
  for (uint32_t i = 0; i < n; ++i) model.vocab.add_entity(detail::get_string(in));
  n = detail::get_u32(in);
  for (uint32_t i = 0; i < n; ++i) model.vocab.add_relation(detail::get_string(in));
  n = detail::get_u32(in);
  for (uint32_t i = 0; i < n; ++i) model.vocab.add_word(detail::get_string(in));
  model.params = detail::get_params(in);
  model.params.validate();
  return model;
}

}  // namespace nam
