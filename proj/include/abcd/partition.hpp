#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace abcd {

// Contiguous partition of coordinate indices [0, total_dim) into blocks.
struct BlockRange {
    int begin = 0;
    int end = 0;  // exclusive

    int size() const { return end - begin; }
};

class BlockPartition {
  public:
    BlockPartition() = default;

    // Explicit boundaries. Ranges must be contiguous, disjoint, and cover
    // [0, total_dim) in order.
    BlockPartition(int total_dim, std::vector<BlockRange> blocks)
        : total_dim_(total_dim), blocks_(std::move(blocks)) {
        if (total_dim_ < 1) throw std::invalid_argument("BlockPartition: total_dim must be >= 1");
        if (blocks_.empty()) throw std::invalid_argument("BlockPartition: need at least one block");
        int cursor = 0;
        for (const auto& b : blocks_) {
            if (b.begin != cursor || b.end <= b.begin)
                throw std::invalid_argument("BlockPartition: blocks must be contiguous and nonempty");
            cursor = b.end;
        }
        if (cursor != total_dim_)
            throw std::invalid_argument("BlockPartition: blocks must cover [0, total_dim)");
    }

    // Default split: contiguous blocks of (near) equal size.
    static BlockPartition equal_blocks(int total_dim, int num_blocks) {
        if (num_blocks < 1 || num_blocks > total_dim)
            throw std::invalid_argument("BlockPartition: invalid num_blocks");
        std::vector<BlockRange> blocks;
        blocks.reserve(num_blocks);
        int base = total_dim / num_blocks;
        int extra = total_dim % num_blocks;
        int cursor = 0;
        for (int i = 0; i < num_blocks; ++i) {
            int sz = base + (i < extra ? 1 : 0);
            blocks.push_back({cursor, cursor + sz});
            cursor += sz;
        }
        return BlockPartition(total_dim, std::move(blocks));
    }

    int total_dim() const { return total_dim_; }
    int num_blocks() const { return static_cast<int>(blocks_.size()); }

    const BlockRange& block(int i) const {
        if (i < 0 || i >= num_blocks())
            throw std::out_of_range("BlockPartition: block index " + std::to_string(i));
        return blocks_[i];
    }

    const std::vector<BlockRange>& blocks() const { return blocks_; }

  private:
    int total_dim_ = 0;
    std::vector<BlockRange> blocks_;
};

}  // namespace abcd
