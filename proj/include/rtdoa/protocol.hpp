#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rtdoa/attacks.hpp"
#include "rtdoa/geometry.hpp"
#include "rtdoa/measurement.hpp"
#include "rtdoa/rng.hpp"

namespace rtdoa {

using Bytes = std::vector<std::uint8_t>;

/// Keyed PRF with a 16-byte output. The simulation default is SipHash-2-4
/// evaluated twice with distinct output tweaks.
class Prf {
  public:
    virtual ~Prf() = default;
    virtual Bytes eval(const Bytes& key, const Bytes& input) const = 0;
};

/// Authenticated symmetric encryption. decrypt returns nothing when the tag
/// does not verify.
class AuthenticatedCipher {
  public:
    virtual ~AuthenticatedCipher() = default;
    virtual Bytes encrypt(const Bytes& key, const Bytes& plaintext, RngEngine& rng) const = 0;
    virtual std::optional<Bytes> decrypt(const Bytes& key, const Bytes& ciphertext) const = 0;
};

struct KeyPair {
    Bytes public_key;
    Bytes private_key;
};

class SignatureScheme {
  public:
    virtual ~SignatureScheme() = default;
    virtual KeyPair generate(RngEngine& rng) const = 0;
    virtual Bytes sign(const Bytes& private_key, const Bytes& message) const = 0;
    virtual bool verify(const Bytes& public_key, const Bytes& message, const Bytes& signature) const = 0;
};

class SipHashPrf final : public Prf {
  public:
    Bytes eval(const Bytes& key, const Bytes& input) const override;
};

/// Counter-mode keystream from the PRF plus a PRF tag over the ciphertext
/// (encrypt-then-MAC). Simulation-strength, not production crypto.
class PrfStreamCipher final : public AuthenticatedCipher {
  public:
    explicit PrfStreamCipher(const Prf& prf) : prf_(&prf) {}
    Bytes encrypt(const Bytes& key, const Bytes& plaintext, RngEngine& rng) const override;
    std::optional<Bytes> decrypt(const Bytes& key, const Bytes& ciphertext) const override;

  private:
    const Prf* prf_;
};

/// Test-double signature scheme: the "public" key equals the MAC key, so
/// verification recomputes the tag. Models tamper detection, not asymmetry.
class MacSignatureScheme final : public SignatureScheme {
  public:
    explicit MacSignatureScheme(const Prf& prf) : prf_(&prf) {}
    KeyPair generate(RngEngine& rng) const override;
    Bytes sign(const Bytes& private_key, const Bytes& message) const override;
    bool verify(const Bytes& public_key, const Bytes& message, const Bytes& signature) const override;

  private:
    const Prf* prf_;
};

struct CryptoSuite {
    const Prf* prf;
    const AuthenticatedCipher* cipher;
    const SignatureScheme* signature;

    static const CryptoSuite& simulation_default();
};

struct Certificate {
    Bytes subject;
    Bytes subject_public_key;
    Bytes signature;  // CA signature over subject || subject_public_key
};

/// Long-lived secrets shared between control center and calibration source,
/// plus the PKI pieces for the first-iteration handshake.
struct KeyMaterial {
    Bytes p1;  // encryption key
    Bytes p2;  // PRF key for responses
    KeyPair cc_keys;
    Bytes ca_public_key;
    Certificate cc_certificate;

    static KeyMaterial generate(RngEngine& rng, const CryptoSuite& suite = CryptoSuite::simulation_default());
};

struct ChallengeMessage {
    Bytes ciphertext;
    Bytes signature;
};

constexpr std::size_t kChallengeBytes = 16;
constexpr std::size_t kResponseBytes = 16;

/// Control-center half of the challenge-response loop: issues encrypted
/// signed challenges and remembers the expected response per flagged one.
class ControlCenter {
  public:
    ControlCenter(const KeyMaterial& keys, const CryptoSuite& suite = CryptoSuite::simulation_default());

    struct Issued {
        int index;
        Bytes challenge;
        bool flag;
        ChallengeMessage message;
    };
    Issued issue_challenge(RngEngine& rng, double flag_probability);

    /// Expected response bytes for a flagged challenge index, if any.
    std::optional<Bytes> expected_response(int challenge_index) const;
    int issued_count() const { return counter_; }

  private:
    const KeyMaterial* keys_;
    const CryptoSuite* suite_;
    int counter_ = 0;
    std::map<int, Bytes> expected_;
};

/// Calibration-source half: verifies the handshake certificate once, then
/// answers valid flagged challenges with PRF(p2, c).
class CalibrationSource {
  public:
    CalibrationSource(const Bytes& p1, const Bytes& p2, const CryptoSuite& suite = CryptoSuite::simulation_default());

    /// First-iteration certificate check; stores PK_CC on success.
    bool handshake(const Certificate& cc_certificate, const Bytes& ca_public_key);
    bool handshake_done() const { return static_cast<bool>(cc_public_key_); }

    /// Returns the response to embed for a valid flagged challenge; nothing
    /// for unflagged challenges or messages that fail authentication.
    std::optional<Bytes> verify_and_respond(const ChallengeMessage& message) const;

  private:
    Bytes p1_, p2_;
    const CryptoSuite* suite_;
    std::optional<Bytes> cc_public_key_;
};

enum class AdversaryKind { none, weak_replay, strong_jam_replay };

struct AdversaryModel {
    AdversaryKind kind = AdversaryKind::none;
    double relay_latency = 1e-6;          // s, extra path delay of replayed frames
    double jam_proportion = 0.0;          // strong model: fraction of frames jammed
    std::vector<double> injected_delays;  // s, per sensor, applied to replays

    void validate(std::size_t sensor_count) const;
};

enum class FrameOrigin { direct, replayed };

/// One frame as timestamped by one sensor. The payload is always
/// kResponseBytes long whether or not it carries a real response.
struct ReceivedFrame {
    int challenge_index;
    int sensor;
    double timestamp;  // s, sensor clock
    Bytes payload;
    FrameOrigin origin;
};

struct AcceptedMeasurement {
    int challenge_index;
    std::vector<double> timestamps;  // per sensor
};

struct AcceptStats {
    int accepted_frames = 0;
    int discarded_duplicates = 0;
    int ignored_frames = 0;
};

/// Accept logic of the control center: per challenge and sensor, the frame
/// with the earliest sensor timestamp carrying the expected response wins;
/// later duplicates are discarded and frames with wrong or filler payloads
/// are ignored. Only challenges with a full set of sensor timestamps yield
/// measurements.
std::vector<AcceptedMeasurement> accept_frames(const std::vector<ReceivedFrame>& frames,
                                               const ControlCenter& cc,
                                               std::size_t sensor_count,
                                               std::vector<std::string>* log = nullptr,
                                               AcceptStats* stats = nullptr);

struct SessionConfig {
    int target_samples = 15;       // flagged challenges to collect (m)
    double flag_probability = 0.5;
    double sigma = 2.192e-9;       // s, TDOA noise added per pair and challenge
    AttackVector sensor_offsets;   // per-sensor clock offsets; empty = zeros
    double challenge_interval = 1.0;  // s between iterations
    bool keep_event_log = true;
};

struct SessionResult {
    TdoaSet samples;                 // target_samples per pair
    int challenges_issued = 0;
    int frames_emitted = 0;
    int accepted = 0;
    int discarded_duplicates = 0;
    int ignored_frames = 0;
    std::vector<std::string> event_log;  // line-delimited audit transcript
};

/// Runs the full loop: handshake, challenge issue, frame propagation under
/// the adversary model, acceptance, and TDOA extraction, until
/// target_samples flagged challenges have produced measurements.
SessionResult run_calibration_session(const SensorNetwork& network, const Point& cs_position,
                                      const KeyMaterial& keys, const AdversaryModel& adversary,
                                      const SessionConfig& config, std::uint64_t seed,
                                      const CryptoSuite& suite = CryptoSuite::simulation_default());

}  // namespace rtdoa
