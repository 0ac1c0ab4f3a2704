#include "truckmorl/autodiff/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <type_traits>
#include <vector>

#include "truckmorl/errors.hpp"

namespace truckmorl::ad {

namespace {

constexpr std::array<char, 8> kMagic{'T', 'M', 'R', 'L', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  template <typename T>
  void put(T value) {
    static_assert(std::is_arithmetic_v<T>);
    using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
              std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>;
    static_assert(sizeof(T) == sizeof(U));
    U bits;
    std::memcpy(&bits, &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes_.push_back(static_cast<char>((bits >> (8 * i)) & 0xffU));
  }

  void put_bytes(const char* data, std::size_t n) { bytes_.insert(bytes_.end(), data, data + n); }

  template <typename Scalar>
  void put_matrix_data(const Matrix<Scalar>& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) put(m.data()[i]);
  }

  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class Reader {
 public:
  explicit Reader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

  template <typename T>
  T get() {
    static_assert(std::is_arithmetic_v<T>);
    using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
              std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>;
    need(sizeof(U));
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
      bits |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += sizeof(U);
    T value;
    std::memcpy(&value, &bits, sizeof(T));
    return value;
  }

  std::string get_string(std::size_t n) {
    need(n);
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }

  template <typename Scalar>
  void get_matrix_data(Matrix<Scalar>& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = get<Scalar>();
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw CheckpointError("checkpoint: unexpected end of data");
  }

  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open '" + path.string() + "'");
  return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_spec(Writer& w, const NetworkSpec& spec) {
  w.put<std::int32_t>(spec.observation_size);
  w.put<std::int32_t>(spec.weight_size);
  w.put<std::int32_t>(spec.action_count);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(spec.observation_layers.size()));
  for (int x : spec.observation_layers) w.put<std::int32_t>(x);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(spec.weight_layers.size()));
  for (int x : spec.weight_layers) w.put<std::int32_t>(x);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(spec.activation));
  w.put<double>(spec.hidden_gain);
  w.put<double>(spec.actor_head_gain);
  w.put<double>(spec.critic_head_gain);
  w.put<std::uint64_t>(spec.seed);
}

NetworkSpec read_spec(Reader& r) {
  NetworkSpec spec;
  spec.observation_size = r.get<std::int32_t>();
  spec.weight_size = r.get<std::int32_t>();
  spec.action_count = r.get<std::int32_t>();
  spec.observation_layers.resize(r.get<std::uint32_t>());
  for (int& x : spec.observation_layers) x = r.get<std::int32_t>();
  spec.weight_layers.resize(r.get<std::uint32_t>());
  for (int& x : spec.weight_layers) x = r.get<std::int32_t>();
  const auto act = r.get<std::uint8_t>();
  if (act > 1) throw CheckpointError("checkpoint: unknown activation");
  spec.activation = static_cast<Activation>(act);
  spec.hidden_gain = r.get<double>();
  spec.actor_head_gain = r.get<double>();
  spec.critic_head_gain = r.get<double>();
  spec.seed = r.get<std::uint64_t>();
  return spec;
}

}  // namespace

template <typename Scalar>
void save_checkpoint(const std::filesystem::path& path, const ActorCritic<Scalar>& network,
                     const AdamState<Scalar>* adam) {
  Writer w;
  w.put_bytes(kMagic.data(), kMagic.size());
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint32_t>(sizeof(Scalar));
  w.put<std::uint64_t>(network.spec.hash());
  write_spec(w, network.spec);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(network.params.size()));
  for (const auto& b : network.params) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(b.name.size()));
    w.put_bytes(b.name.data(), b.name.size());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(b.value.rows()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(b.value.cols()));
    w.put_matrix_data(b.value);
  }
  w.put<std::uint8_t>(adam != nullptr ? 1 : 0);
  if (adam != nullptr) {
    w.put<double>(adam->config.learning_rate);
    w.put<double>(adam->config.beta1);
    w.put<double>(adam->config.beta2);
    w.put<double>(adam->config.epsilon);
    w.put<std::int64_t>(adam->step);
    for (const auto& m : adam->first_moment) w.put_matrix_data(m);
    for (const auto& m : adam->second_moment) w.put_matrix_data(m);
  }

  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("checkpoint: cannot write '" + tmp.string() + "'");
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw CheckpointError("checkpoint: write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

template <typename Scalar>
LoadedCheckpoint<Scalar> load_checkpoint(const std::filesystem::path& path) {
  Reader r(read_file(path));
  if (r.get_string(kMagic.size()) != std::string(kMagic.data(), kMagic.size()))
    throw CheckpointError("checkpoint: bad magic in '" + path.string() + "'");
  if (const auto v = r.get<std::uint32_t>(); v != kCheckpointVersion)
    throw CheckpointError("checkpoint: unsupported version " + std::to_string(v));
  if (const auto bytes = r.get<std::uint32_t>(); bytes != sizeof(Scalar))
    throw CheckpointError("checkpoint: stored scalar width " + std::to_string(bytes) + " does not match " +
                          std::to_string(sizeof(Scalar)));
  const auto stored_hash = r.get<std::uint64_t>();
  NetworkSpec spec = read_spec(r);
  if (spec.hash() != stored_hash) throw CheckpointError("checkpoint: spec hash mismatch");

  LoadedCheckpoint<Scalar> out{make_actor_critic<Scalar>(spec), std::nullopt};
  const auto blocks = r.get<std::uint32_t>();
  if (blocks != out.network.params.size()) throw CheckpointError("checkpoint: block count does not match spec");
  for (auto& b : out.network.params) {
    const auto name = r.get_string(r.get<std::uint32_t>());
    const auto rows = r.get<std::uint32_t>();
    const auto cols = r.get<std::uint32_t>();
    if (name != b.name || rows != b.value.rows() || cols != b.value.cols())
      throw CheckpointError("checkpoint: block '" + name + "' does not match spec layout");
    r.get_matrix_data(b.value);
  }
  if (r.get<std::uint8_t>() != 0) {
    AdamConfig cfg;
    cfg.learning_rate = r.get<double>();
    cfg.beta1 = r.get<double>();
    cfg.beta2 = r.get<double>();
    cfg.epsilon = r.get<double>();
    AdamState<Scalar> adam = make_adam_state(out.network.params, cfg);
    adam.step = r.get<std::int64_t>();
    for (auto& m : adam.first_moment) r.get_matrix_data(m);
    for (auto& m : adam.second_moment) r.get_matrix_data(m);
    out.adam = std::move(adam);
  }
  if (!r.at_end()) throw CheckpointError("checkpoint: trailing bytes in '" + path.string() + "'");
  return out;
}

int checkpoint_scalar_bytes(const std::filesystem::path& path) {
  Reader r(read_file(path));
  if (r.get_string(kMagic.size()) != std::string(kMagic.data(), kMagic.size()))
    throw CheckpointError("checkpoint: bad magic in '" + path.string() + "'");
  r.get<std::uint32_t>();
  return static_cast<int>(r.get<std::uint32_t>());
}

template void save_checkpoint<float>(const std::filesystem::path&, const ActorCritic<float>&, const AdamState<float>*);
template void save_checkpoint<double>(const std::filesystem::path&, const ActorCritic<double>&,
                                      const AdamState<double>*);
template LoadedCheckpoint<float> load_checkpoint<float>(const std::filesystem::path&);
template LoadedCheckpoint<double> load_checkpoint<double>(const std::filesystem::path&);

}  // namespace truckmorl::ad
