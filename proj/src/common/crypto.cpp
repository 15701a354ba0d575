// SPDX-License-Identifier: Apache-2.0
#include "pathnav/crypto.hpp"

#include "pathnav/error.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

namespace pathnav
{

namespace
{

struct DigestCtxDeleter
{
    void operator()(EVP_MD_CTX* ctx) const noexcept { EVP_MD_CTX_free(ctx); }
};

class Sha256
{
public:
    Sha256(): _ctx(EVP_MD_CTX_new())
    {
        if (!_ctx || EVP_DigestInit_ex(_ctx.get(), EVP_sha256(), nullptr) != 1)
            throw Error(ErrorCode::Io, "sha256 init failed");
    }

    void update(const void* data, std::size_t n)
    {
        if (EVP_DigestUpdate(_ctx.get(), data, n) != 1)
            throw Error(ErrorCode::Io, "sha256 update failed");
    }

    std::string hex()
    {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(_ctx.get(), md.data(), &len) != 1)
            throw Error(ErrorCode::Io, "sha256 final failed");
        static constexpr char digits[] = "0123456789abcdef";
        std::string out;
        out.reserve(len * 2);
        for (unsigned int i = 0; i < len; ++i)
        {
            out.push_back(digits[md[i] >> 4]);
            out.push_back(digits[md[i] & 0xf]);
        }
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, DigestCtxDeleter> _ctx;
};

} // namespace

std::string sha256_hex(std::string_view data)
{
    Sha256 h;
    h.update(data.data(), data.size());
    return h.hex();
}

std::string sha256_hex(std::span<const std::uint8_t> data)
{
    Sha256 h;
    h.update(data.data(), data.size());
    return h.hex();
}

std::string sha256_file_hex(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    Sha256 h;
    std::array<char, 1 << 16> buf{};
    while (in)
    {
        in.read(buf.data(), buf.size());
        h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return h.hex();
}

std::string base64_encode(std::span<const std::uint8_t> data)
{
    std::string out(4 * ((data.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(), static_cast<int>(data.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

} // namespace pathnav
