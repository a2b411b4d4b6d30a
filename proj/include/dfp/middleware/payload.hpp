// Copyright 2026 The DFP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DFP__MIDDLEWARE__PAYLOAD_HPP_
#define DFP__MIDDLEWARE__PAYLOAD_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace dfp::middleware
{

struct BufferLease;

/// Immutable, shared handle to a published payload. Copies share the buffer;
/// the bytes are never written after the owning Loan was published.
class Payload
{
public:
  Payload() = default;

  static Payload copy_of(std::span<const std::byte> bytes);

  std::span<const std::byte> bytes() const {return {data_, size_};}
  const std::byte * data() const {return data_;}
  std::size_t size() const {return size_;}
  bool empty() const {return size_ == 0;}

  /// Identity of the underlying buffer, stable across copies of the handle.
  const void * buffer_id() const {return lease_.get();}

  /// Number of live handles (publisher history plus queued or held samples).
  long holders() const {return lease_.use_count();}

private:
  friend class Loan;
  Payload(std::shared_ptr<const BufferLease> lease, const std::byte * data, std::size_t size)
  : lease_(std::move(lease)), data_(data), size_(size) {}

  std::shared_ptr<const BufferLease> lease_;
  const std::byte * data_ = nullptr;
  std::size_t size_ = 0;
};

/// Exclusive writable view of a buffer, turned into a Payload on publish.
class Loan
{
public:
  Loan() = default;
  Loan(Loan &&) noexcept = default;
  Loan & operator=(Loan &&) noexcept = default;
  Loan(const Loan &) = delete;
  Loan & operator=(const Loan &) = delete;

  static Loan heap(std::size_t size);

  std::span<std::byte> data() {return {mem_, size_};}
  std::size_t size() const {return size_;}
  explicit operator bool() const {return static_cast<bool>(lease_);}

  /// Consumes the loan.
  Payload freeze() &&;

private:
  friend class SlotArena;
  Loan(std::shared_ptr<BufferLease> lease, std::byte * mem, std::size_t size)
  : lease_(std::move(lease)), mem_(mem), size_(size) {}

  std::shared_ptr<BufferLease> lease_;
  std::byte * mem_ = nullptr;
  std::size_t size_ = 0;
};

/// Fixed-size slots recycled once the last handle to a slot is released.
/// Grows by one slot when every slot is in use.
class SlotArena : public std::enable_shared_from_this<SlotArena>
{
public:
  static std::shared_ptr<SlotArena> create(std::size_t slot_size);

  /// Throws MwError{PayloadTooLarge} when size exceeds the slot size.
  Loan loan(std::size_t size);

  std::size_t slot_size() const {return slot_size_;}
  std::size_t slot_count() const;
  std::size_t free_slots() const;
  std::size_t slots_in_use() const;

private:
  friend struct BufferLease;
  explicit SlotArena(std::size_t slot_size) : slot_size_(slot_size) {}
  void release(std::uint32_t index);

  std::size_t slot_size_;
  mutable std::mutex mutex_;
  std::vector<std::unique_ptr<std::byte[]>> slots_;
  std::vector<std::uint32_t> free_;
};

}  // namespace dfp::middleware

#endif  // DFP__MIDDLEWARE__PAYLOAD_HPP_
