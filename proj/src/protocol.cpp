#include "rtdoa/protocol.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace rtdoa {

namespace {

inline std::uint64_t rotl64(std::uint64_t x, int b) { return (x << b) | (x >> (64 - b)); }

inline std::uint64_t load_le64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

inline void store_le64(std::uint64_t v, std::uint8_t* p) {
    for (int i = 0; i < 8; ++i) {
        p[i] = static_cast<std::uint8_t>(v & 0xff);
        v >>= 8;
    }
}

struct SipState {
    std::uint64_t v0, v1, v2, v3;

    void round() {
        v0 += v1; v1 = rotl64(v1, 13); v1 ^= v0; v0 = rotl64(v0, 32);
        v2 += v3; v3 = rotl64(v3, 16); v3 ^= v2;
        v0 += v3; v3 = rotl64(v3, 21); v3 ^= v0;
        v2 += v1; v1 = rotl64(v1, 17); v1 ^= v2; v2 = rotl64(v2, 32);
    }
};

// SipHash-2-4 with 128-bit output (reference construction).
void siphash128(const std::uint8_t key[16], const Bytes& input, std::uint8_t out[16]) {
    const std::uint64_t k0 = load_le64(key);
    const std::uint64_t k1 = load_le64(key + 8);
    SipState s{0x736f6d6570736575ULL ^ k0, 0x646f72616e646f6dULL ^ k1,
               0x6c7967656e657261ULL ^ k0, 0x7465646279746573ULL ^ k1};
    s.v1 ^= 0xee;

    const std::size_t len = input.size();
    const std::size_t blocks = len / 8;
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::uint64_t m = load_le64(input.data() + 8 * b);
        s.v3 ^= m;
        s.round();
        s.round();
        s.v0 ^= m;
    }
    std::uint64_t last = static_cast<std::uint64_t>(len & 0xff) << 56;
    for (std::size_t i = 0; i < len % 8; ++i)
        last |= static_cast<std::uint64_t>(input[blocks * 8 + i]) << (8 * i);
    s.v3 ^= last;
    s.round();
    s.round();
    s.v0 ^= last;

    s.v2 ^= 0xee;
    for (int i = 0; i < 4; ++i) s.round();
    store_le64(s.v0 ^ s.v1 ^ s.v2 ^ s.v3, out);
    s.v1 ^= 0xdd;
    for (int i = 0; i < 4; ++i) s.round();
    store_le64(s.v0 ^ s.v1 ^ s.v2 ^ s.v3, out + 8);
}

Bytes random_bytes(RngEngine& rng, std::size_t count) {
    Bytes out(count);
    std::uniform_int_distribution<int> byte(0, 255);
    for (auto& b : out) b = static_cast<std::uint8_t>(byte(rng));
    return out;
}

Bytes concat(std::initializer_list<const Bytes*> parts) {
    Bytes out;
    std::size_t total = 0;
    for (const Bytes* p : parts) total += p->size();
    out.reserve(total);
    for (const Bytes* p : parts) out.insert(out.end(), p->begin(), p->end());
    return out;
}

}  // namespace

Bytes SipHashPrf::eval(const Bytes& key, const Bytes& input) const {
    std::uint8_t k[16] = {0};
    std::memcpy(k, key.data(), std::min<std::size_t>(key.size(), 16));
    Bytes out(16);
    siphash128(k, input, out.data());
    return out;
}

Bytes PrfStreamCipher::encrypt(const Bytes& key, const Bytes& plaintext, RngEngine& rng) const {
    const Bytes nonce = random_bytes(rng, 8);
    Bytes body = plaintext;
    Bytes block_input = nonce;
    block_input.push_back(0);  // domain: keystream
    block_input.push_back(0);  // block counter
    for (std::size_t off = 0; off < body.size(); off += 16) {
        block_input[9] = static_cast<std::uint8_t>(off / 16);
        const Bytes stream = prf_->eval(key, block_input);
        for (std::size_t i = off; i < std::min(off + 16, body.size()); ++i)
            body[i] ^= stream[i - off];
    }
    Bytes tagged = nonce;
    tagged.push_back(1);  // domain: tag
    tagged.insert(tagged.end(), body.begin(), body.end());
    const Bytes tag = prf_->eval(key, tagged);

    Bytes out = concat({&nonce, &body, &tag});
    return out;
}

std::optional<Bytes> PrfStreamCipher::decrypt(const Bytes& key, const Bytes& ciphertext) const {
    if (ciphertext.size() < 8 + 16) return std::nullopt;
    const Bytes nonce(ciphertext.begin(), ciphertext.begin() + 8);
    Bytes body(ciphertext.begin() + 8, ciphertext.end() - 16);
    const Bytes tag(ciphertext.end() - 16, ciphertext.end());

    Bytes tagged = nonce;
    tagged.push_back(1);
    tagged.insert(tagged.end(), body.begin(), body.end());
    if (prf_->eval(key, tagged) != tag) return std::nullopt;

    Bytes block_input = nonce;
    block_input.push_back(0);
    block_input.push_back(0);
    for (std::size_t off = 0; off < body.size(); off += 16) {
        block_input[9] = static_cast<std::uint8_t>(off / 16);
        const Bytes stream = prf_->eval(key, block_input);
        for (std::size_t i = off; i < std::min(off + 16, body.size()); ++i)
            body[i] ^= stream[i - off];
    }
    return body;
}

KeyPair MacSignatureScheme::generate(RngEngine& rng) const {
    const Bytes key = random_bytes(rng, 16);
    return KeyPair{key, key};
}

Bytes MacSignatureScheme::sign(const Bytes& private_key, const Bytes& message) const {
    Bytes input{0x02};
    input.insert(input.end(), message.begin(), message.end());
    return prf_->eval(private_key, input);
}

bool MacSignatureScheme::verify(const Bytes& public_key, const Bytes& message,
                                const Bytes& signature) const {
    return sign(public_key, message) == signature;
}

const CryptoSuite& CryptoSuite::simulation_default() {
    static const SipHashPrf prf;
    static const PrfStreamCipher cipher(prf);
    static const MacSignatureScheme sig(prf);
    static const CryptoSuite suite{&prf, &cipher, &sig};
    return suite;
}

KeyMaterial KeyMaterial::generate(RngEngine& rng, const CryptoSuite& suite) {
    KeyMaterial keys;
    keys.p1 = random_bytes(rng, 16);
    keys.p2 = random_bytes(rng, 16);
    keys.cc_keys = suite.signature->generate(rng);

    const KeyPair ca = suite.signature->generate(rng);
    keys.ca_public_key = ca.public_key;
    keys.cc_certificate.subject = Bytes{'c', 'o', 'n', 't', 'r', 'o', 'l', '-', 'c', 'e', 'n', 't', 'e', 'r'};
    keys.cc_certificate.subject_public_key = keys.cc_keys.public_key;
    const Bytes payload = concat({&keys.cc_certificate.subject, &keys.cc_certificate.subject_public_key});
    keys.cc_certificate.signature = suite.signature->sign(ca.private_key, payload);
    return keys;
}

ControlCenter::ControlCenter(const KeyMaterial& keys, const CryptoSuite& suite)
    : keys_(&keys), suite_(&suite) {}

ControlCenter::Issued ControlCenter::issue_challenge(RngEngine& rng, double flag_probability) {
    if (!(flag_probability > 0.0 && flag_probability <= 1.0))
        throw std::invalid_argument("issue_challenge: flag probability outside (0,1]");

    // 8-byte counter prefix keeps challenges unique; the random half keeps
    // them unpredictable.
    Bytes challenge(kChallengeBytes);
    std::uint64_t ctr = static_cast<std::uint64_t>(counter_);
    for (int i = 7; i >= 0; --i) {
        challenge[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(ctr & 0xff);
        ctr >>= 8;
    }
    const Bytes rnd = random_bytes(rng, 8);
    std::copy(rnd.begin(), rnd.end(), challenge.begin() + 8);

    std::bernoulli_distribution coin(flag_probability);
    const bool flag = flag_probability >= 1.0 ? true : coin(rng);

    Bytes plaintext = challenge;
    plaintext.push_back(flag ? 1 : 0);
    ChallengeMessage msg;
    msg.ciphertext = suite_->cipher->encrypt(keys_->p1, plaintext, rng);
    msg.signature = suite_->signature->sign(keys_->cc_keys.private_key, msg.ciphertext);

    const int index = counter_++;
    if (flag) expected_[index] = suite_->prf->eval(keys_->p2, challenge);
    return Issued{index, challenge, flag, msg};
}

std::optional<Bytes> ControlCenter::expected_response(int challenge_index) const {
    const auto it = expected_.find(challenge_index);
    if (it == expected_.end()) return std::nullopt;
    return it->second;
}

CalibrationSource::CalibrationSource(const Bytes& p1, const Bytes& p2, const CryptoSuite& suite)
    : p1_(p1), p2_(p2), suite_(&suite) {}

bool CalibrationSource::handshake(const Certificate& cc_certificate, const Bytes& ca_public_key) {
    Bytes payload = cc_certificate.subject;
    payload.insert(payload.end(), cc_certificate.subject_public_key.begin(),
                   cc_certificate.subject_public_key.end());
    if (!suite_->signature->verify(ca_public_key, payload, cc_certificate.signature)) return false;
    cc_public_key_ = cc_certificate.subject_public_key;
    return true;
}

std::optional<Bytes> CalibrationSource::verify_and_respond(const ChallengeMessage& message) const {
    if (!cc_public_key_) throw std::logic_error("verify_and_respond before handshake");
    if (!suite_->signature->verify(*cc_public_key_, message.ciphertext, message.signature))
        return std::nullopt;
    const std::optional<Bytes> plaintext = suite_->cipher->decrypt(p1_, message.ciphertext);
    if (!plaintext || plaintext->size() != kChallengeBytes + 1) return std::nullopt;
    const bool flag = plaintext->back() == 1;
    if (!flag) return std::nullopt;
    const Bytes challenge(plaintext->begin(), plaintext->begin() + kChallengeBytes);
    return suite_->prf->eval(p2_, challenge);
}

void AdversaryModel::validate(std::size_t sensor_count) const {
    if (!injected_delays.empty() && injected_delays.size() != sensor_count)
        throw std::invalid_argument("adversary: injected_delays must match sensor count");
    if (kind != AdversaryKind::none) {
        if (relay_latency <= 0.0)
            throw std::invalid_argument("adversary: relay latency must be positive");
        for (double d : injected_delays)
            if (relay_latency + d <= 0.0)
                throw std::invalid_argument("adversary: replay must arrive after the direct frame");
    }
    if (kind == AdversaryKind::strong_jam_replay && (jam_proportion < 0.0 || jam_proportion > 1.0))
        throw std::invalid_argument("adversary: jam proportion outside [0,1]");
}

std::vector<AcceptedMeasurement> accept_frames(const std::vector<ReceivedFrame>& frames,
                                               const ControlCenter& cc, std::size_t sensor_count,
                                               std::vector<std::string>* log, AcceptStats* stats) {
    std::vector<ReceivedFrame> sorted = frames;
    std::stable_sort(sorted.begin(), sorted.end(), [](const ReceivedFrame& a, const ReceivedFrame& b) {
        if (a.challenge_index != b.challenge_index) return a.challenge_index < b.challenge_index;
        if (a.sensor != b.sensor) return a.sensor < b.sensor;
        return a.timestamp < b.timestamp;
    });

    const auto say = [&](const ReceivedFrame& f, const char* what) {
        if (!log) return;
        std::ostringstream line;
        line.precision(15);
        line << "challenge=" << f.challenge_index << " sensor=" << f.sensor
             << " t=" << f.timestamp << " origin="
             << (f.origin == FrameOrigin::direct ? "direct" : "replayed") << " " << what;
        log->push_back(line.str());
    };

    AcceptStats local;
    std::map<int, std::map<int, double>> chosen;  // challenge -> sensor -> timestamp
    for (const ReceivedFrame& f : sorted) {
        const std::optional<Bytes> expected = cc.expected_response(f.challenge_index);
        if (!expected) {
            ++local.ignored_frames;
            say(f, "ignored (no response expected)");
            continue;
        }
        if (f.payload != *expected) {
            ++local.ignored_frames;
            say(f, "ignored (payload mismatch)");
            continue;
        }
        auto& per_sensor = chosen[f.challenge_index];
        if (per_sensor.count(f.sensor)) {
            ++local.discarded_duplicates;
            say(f, "discarded (reoccurring response)");
            continue;
        }
        per_sensor[f.sensor] = f.timestamp;
        ++local.accepted_frames;
        say(f, "accepted");
    }
    if (stats) *stats = local;

    std::vector<AcceptedMeasurement> out;
    for (const auto& [challenge, per_sensor] : chosen) {
        if (per_sensor.size() != sensor_count) {
            if (log)
                log->push_back("challenge=" + std::to_string(challenge) +
                               " dropped (incomplete sensor coverage)");
            continue;
        }
        AcceptedMeasurement m;
        m.challenge_index = challenge;
        m.timestamps.resize(sensor_count);
        for (const auto& [sensor, ts] : per_sensor) m.timestamps[static_cast<std::size_t>(sensor)] = ts;
        out.push_back(std::move(m));
    }
    return out;
}

SessionResult run_calibration_session(const SensorNetwork& network, const Point& cs_position,
                                      const KeyMaterial& keys, const AdversaryModel& adversary,
                                      const SessionConfig& config, std::uint64_t seed,
                                      const CryptoSuite& suite) {
    const std::size_t n_sensors = network.size();
    adversary.validate(n_sensors);
    if (config.target_samples < 1)
        throw std::invalid_argument("session: target_samples must be >= 1");
    if (config.sigma <= 0.0) throw std::invalid_argument("session: sigma must be positive");
    AttackVector offsets = config.sensor_offsets;
    if (offsets.offsets.empty()) offsets = AttackVector::zeros(n_sensors);
    if (offsets.size() != n_sensors)
        throw std::invalid_argument("session: sensor_offsets must match sensor count");

    SessionResult result;
    ControlCenter cc(keys, suite);
    CalibrationSource cs(keys.p1, keys.p2, suite);
    if (!cs.handshake(keys.cc_certificate, keys.ca_public_key))
        throw std::runtime_error("session: certificate verification failed");
    if (config.keep_event_log) result.event_log.push_back("handshake ok, PK_CC extracted");

    // Independent streams: the protocol draws must not shift when the
    // adversary draws more or fewer of its own.
    RngEngine protocol_rng = make_stream(seed, {0});
    RngEngine adversary_rng = make_stream(seed, {2});

    std::vector<double> direct_delay(n_sensors);
    for (std::size_t i = 0; i < n_sensors; ++i)
        direct_delay[i] = propagation_delay(network.sensors[i], cs_position, network.signal_speed);

    std::vector<ReceivedFrame> frames;
    std::vector<int> flagged_indices;
    const int cap = 100 + 50 * config.target_samples;
    int iteration = 0;
    for (; iteration < cap && static_cast<int>(flagged_indices.size()) < config.target_samples;
         ++iteration) {
        const double t_emit = iteration * config.challenge_interval;
        const auto issued = cc.issue_challenge(protocol_rng, config.flag_probability);
        const std::optional<Bytes> response = cs.verify_and_respond(issued.message);
        // Frames with and without responses share one fixed-size envelope.
        const Bytes payload = response ? *response : random_bytes(protocol_rng, kResponseBytes);
        ++result.frames_emitted;
        if (config.keep_event_log)
            result.event_log.push_back("t=" + std::to_string(t_emit) + " challenge=" +
                                       std::to_string(issued.index) +
                                       (issued.flag ? " issued flagged, frame emitted"
                                                    : " issued unflagged, frame emitted"));

        bool jammed = false;
        if (adversary.kind == AdversaryKind::strong_jam_replay) {
            std::bernoulli_distribution coin(adversary.jam_proportion);
            jammed = coin(adversary_rng);
        }

        if (!jammed) {
            for (std::size_t i = 0; i < n_sensors; ++i)
                frames.push_back({issued.index, static_cast<int>(i),
                                  t_emit + direct_delay[i] + offsets.offsets[i], payload,
                                  FrameOrigin::direct});
        } else if (config.keep_event_log) {
            result.event_log.push_back("challenge=" + std::to_string(issued.index) +
                                       " direct frame jammed");
        }
        if (adversary.kind != AdversaryKind::none) {
            for (std::size_t i = 0; i < n_sensors; ++i) {
                const double injected =
                    adversary.injected_delays.empty() ? 0.0 : adversary.injected_delays[i];
                frames.push_back({issued.index, static_cast<int>(i),
                                  t_emit + direct_delay[i] + adversary.relay_latency + injected +
                                      offsets.offsets[i],
                                  payload, FrameOrigin::replayed});
            }
        }
        if (issued.flag) flagged_indices.push_back(issued.index);
    }
    result.challenges_issued = iteration;

    std::vector<std::string>* accept_log = config.keep_event_log ? &result.event_log : nullptr;
    AcceptStats stats;
    const std::vector<AcceptedMeasurement> accepted =
        accept_frames(frames, cc, n_sensors, accept_log, &stats);
    result.accepted = static_cast<int>(accepted.size());
    result.discarded_duplicates = stats.discarded_duplicates;
    result.ignored_frames = stats.ignored_frames;

    // One TDOA sample per pair per accepted challenge, noise keyed by the
    // challenge index so adversary activity cannot shift the draws.
    TdoaSet set;
    set.pairs = sensor_pairs(static_cast<int>(n_sensors));
    set.sigma.assign(set.pairs.size(), config.sigma);
    set.samples.assign(set.pairs.size(), {});
    for (const AcceptedMeasurement& m : accepted) {
        RngEngine noise_rng = make_stream(seed, {1, static_cast<std::uint64_t>(m.challenge_index)});
        std::normal_distribution<double> noise(0.0, config.sigma);
        for (std::size_t p = 0; p < set.pairs.size(); ++p) {
            const auto [i, j] = set.pairs[p];
            set.samples[p].push_back(m.timestamps[static_cast<std::size_t>(i)] -
                                     m.timestamps[static_cast<std::size_t>(j)] + noise(noise_rng));
        }
    }
    result.samples = std::move(set);
    return result;
}

}  // namespace rtdoa
