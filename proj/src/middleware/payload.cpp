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

#include "dfp/middleware/payload.hpp"

#include <cstring>
#include <string>

#include "dfp/middleware/errors.hpp"

namespace dfp::middleware
{

struct BufferLease
{
  BufferLease() = default;
  BufferLease(const BufferLease &) = delete;
  BufferLease & operator=(const BufferLease &) = delete;

  ~BufferLease()
  {
    if (arena) {
      arena->release(index);
    }
  }

  std::shared_ptr<SlotArena> arena;
  std::uint32_t index = 0;
  std::unique_ptr<std::byte[]> owned;
};

Payload Payload::copy_of(std::span<const std::byte> bytes)
{
  Loan loan = Loan::heap(bytes.size());
  if (!bytes.empty()) {
    std::memcpy(loan.data().data(), bytes.data(), bytes.size());
  }
  return std::move(loan).freeze();
}

Loan Loan::heap(std::size_t size)
{
  auto lease = std::make_shared<BufferLease>();
  lease->owned = std::make_unique_for_overwrite<std::byte[]>(size == 0 ? 1 : size);
  std::byte * mem = lease->owned.get();
  return Loan(std::move(lease), mem, size);
}

Payload Loan::freeze() &&
{
  Payload p(std::move(lease_), mem_, size_);
  mem_ = nullptr;
  size_ = 0;
  return p;
}

std::shared_ptr<SlotArena> SlotArena::create(std::size_t slot_size)
{
  return std::shared_ptr<SlotArena>(new SlotArena(slot_size));
}

Loan SlotArena::loan(std::size_t size)
{
  if (size > slot_size_) {
    throw MwError(
      MwErrc::PayloadTooLarge,
      "payload of " + std::to_string(size) + " bytes exceeds arena slot size " +
      std::to_string(slot_size_));
  }
  std::uint32_t index = 0;
  std::byte * mem = nullptr;
  {
    std::lock_guard lock(mutex_);
    if (free_.empty()) {
      // Left uninitialized so untouched pages are never committed.
      slots_.push_back(std::make_unique_for_overwrite<std::byte[]>(slot_size_ == 0 ? 1 : slot_size_));
      index = static_cast<std::uint32_t>(slots_.size() - 1);
    } else {
      index = free_.back();
      free_.pop_back();
    }
    mem = slots_[index].get();
  }
  auto lease = std::make_shared<BufferLease>();
  lease->arena = shared_from_this();
  lease->index = index;
  return Loan(std::move(lease), mem, size);
}

void SlotArena::release(std::uint32_t index)
{
  std::lock_guard lock(mutex_);
  free_.push_back(index);
}

std::size_t SlotArena::slot_count() const
{
  std::lock_guard lock(mutex_);
  return slots_.size();
}

std::size_t SlotArena::free_slots() const
{
  std::lock_guard lock(mutex_);
  return free_.size();
}

std::size_t SlotArena::slots_in_use() const
{
  std::lock_guard lock(mutex_);
  return slots_.size() - free_.size();
}

}  // namespace dfp::middleware
