#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <ostream>
#include <set>
#include <utility>

#include "frame.hpp"

namespace noisepad::transport {

/// Ordered, reliable frame pipe between two parties.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual void send(const Frame& frame) = 0;
  virtual Frame receive() = 0;
  /// Unblocks the peer; later operations fail with ErrorCode::channel.
  virtual void close() {}
};

namespace detail {

struct LoopbackQueue {
  std::mutex mutex;
  std::condition_variable ready;
  std::deque<std::vector<std::uint8_t>> frames;
  bool closed = false;
};

}  // namespace detail

/// In-process channel end. Frames travel as encoded bytes so the loopback
/// exercises the same codec as a socket.
class LoopbackChannel : public Channel {
 public:
  LoopbackChannel(std::shared_ptr<detail::LoopbackQueue> in, std::shared_ptr<detail::LoopbackQueue> out,
                  std::chrono::milliseconds timeout)
      : in_(std::move(in)), out_(std::move(out)), timeout_(timeout) {}

  ~LoopbackChannel() override { close(); }

  void send(const Frame& frame) override {
    auto bytes = frame_encode(frame);
    std::lock_guard lock(out_->mutex);
    if (out_->closed) throw Error(ErrorCode::channel, "loopback peer closed");
    out_->frames.push_back(std::move(bytes));
    out_->ready.notify_all();
  }

  Frame receive() override {
    std::unique_lock lock(in_->mutex);
    if (!in_->ready.wait_for(lock, timeout_, [&] { return !in_->frames.empty() || in_->closed; })) {
      throw Error(ErrorCode::channel, "timed out waiting for a frame");
    }
    if (in_->frames.empty()) throw Error(ErrorCode::channel, "loopback peer closed");
    auto bytes = std::move(in_->frames.front());
    in_->frames.pop_front();
    lock.unlock();
    return frame_decode(bytes);
  }

  void close() override {
    for (auto* q : {in_.get(), out_.get()}) {
      std::lock_guard lock(q->mutex);
      q->closed = true;
      q->ready.notify_all();
    }
  }

 private:
  std::shared_ptr<detail::LoopbackQueue> in_;
  std::shared_ptr<detail::LoopbackQueue> out_;
  std::chrono::milliseconds timeout_;
};

inline std::pair<std::unique_ptr<LoopbackChannel>, std::unique_ptr<LoopbackChannel>> make_loopback_pair(
    std::chrono::milliseconds timeout = std::chrono::seconds(30)) {
  auto ab = std::make_shared<detail::LoopbackQueue>();
  auto ba = std::make_shared<detail::LoopbackQueue>();
  return {std::make_unique<LoopbackChannel>(ba, ab, timeout), std::make_unique<LoopbackChannel>(ab, ba, timeout)};
}

/// Passive observer: copies selected frames, byte for byte and in wire order,
/// to a stream. A failing stream marks the tap broken but never disturbs the
/// session.
class TapChannel : public Channel {
 public:
  static std::set<MessageType> default_filter() { return {MessageType::keyblock, MessageType::pa_seed}; }

  TapChannel(Channel& inner, std::ostream& out, std::set<MessageType> filter = default_filter())
      : inner_(inner), out_(out), filter_(std::move(filter)) {}

  void send(const Frame& frame) override {
    inner_.send(frame);
    record(frame);
  }

  Frame receive() override {
    Frame f = inner_.receive();
    record(f);
    return f;
  }

  void close() override { inner_.close(); }

  bool failed() const noexcept { return failed_; }
  std::size_t frames_recorded() const noexcept { return recorded_; }

 private:
  void record(const Frame& f) {
    if (failed_ || !filter_.contains(f.type)) return;
    const auto bytes = frame_encode(f);
    out_.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out_.flush();
    if (!out_) {
      failed_ = true;
      return;
    }
    ++recorded_;
  }

  Channel& inner_;
  std::ostream& out_;
  std::set<MessageType> filter_;
  bool failed_ = false;
  std::size_t recorded_ = 0;
};

}  // namespace noisepad::transport
