/** Writer and reader for the binary token-vector interchange file.
 *
 * Little-endian layout: magic "FEMB" | u32 d | u64 total vector count |
 * u32 example count | per example (u32 id length, id bytes, u64 absolute
 * offset) | per example contiguous records of (u32 sent_id, u32 token
 * index, d x f32).  Offsets point at each example's first record; a block
 * ends at the next offset or at the end of file.
 */

export const MAGIC = "FEMB";

export interface VectorRecord {
  sentId: number;
  tokenIndex: number;
  values: Float32Array;
}

export type PerExampleVectors = Map<string, VectorRecord[]>;

export function writeEmbeddings(d: number, perExample: PerExampleVectors): Buffer {
  const ids = [...perExample.keys()];
  const encoder = new TextEncoder();
  const idBytes = ids.map((id) => encoder.encode(id));
  const recordSize = 8 + 4 * d;
  const headerSize = 4 + 4 + 8;
  const tableSize = 4 + idBytes.reduce((acc, b) => acc + 4 + b.length + 8, 0);
  const total = ids.reduce((acc, id) => acc + perExample.get(id)!.length, 0);
  const buf = Buffer.alloc(headerSize + tableSize + total * recordSize);

  buf.write(MAGIC, 0, "ascii");
  buf.writeUInt32LE(d, 4);
  buf.writeBigUInt64LE(BigInt(total), 8);
  let pos = 16;
  buf.writeUInt32LE(ids.length, pos);
  pos += 4;
  let offset = headerSize + tableSize;
  ids.forEach((id, k) => {
    const bytes = idBytes[k];
    buf.writeUInt32LE(bytes.length, pos);
    pos += 4;
    buf.set(bytes, pos);
    pos += bytes.length;
    buf.writeBigUInt64LE(BigInt(offset), pos);
    pos += 8;
    offset += perExample.get(id)!.length * recordSize;
  });
  for (const id of ids) {
    for (const rec of perExample.get(id)!) {
      buf.writeUInt32LE(rec.sentId, pos);
      buf.writeUInt32LE(rec.tokenIndex, pos + 4);
      pos += 8;
      for (let i = 0; i < d; i++) {
        buf.writeFloatLE(rec.values[i], pos);
        pos += 4;
      }
    }
  }
  return buf;
}

export interface EmbeddingFileContents {
  d: number;
  total: number;
  perExample: PerExampleVectors;
}

export function readEmbeddings(buf: Buffer): EmbeddingFileContents {
  if (buf.length < 16 || buf.toString("ascii", 0, 4) !== MAGIC) {
    throw new Error("not an FEMB file (bad magic)");
  }
  const d = buf.readUInt32LE(4);
  const total = Number(buf.readBigUInt64LE(8));
  let pos = 16;
  const nExamples = buf.readUInt32LE(pos);
  pos += 4;
  const entries: Array<{ id: string; offset: number }> = [];
  for (let k = 0; k < nExamples; k++) {
    const len = buf.readUInt32LE(pos);
    pos += 4;
    const id = buf.toString("utf-8", pos, pos + len);
    pos += len;
    const offset = Number(buf.readBigUInt64LE(pos));
    pos += 8;
    entries.push({ id, offset });
  }
  const recordSize = 8 + 4 * d;
  const perExample: PerExampleVectors = new Map();
  let count = 0;
  entries.forEach(({ id, offset }, k) => {
    const end = k + 1 < entries.length ? entries[k + 1].offset : buf.length;
    if ((end - offset) % recordSize !== 0) {
      throw new Error(`ragged record block for example ${id}`);
    }
    const records: VectorRecord[] = [];
    for (let at = offset; at < end; at += recordSize) {
      const sentId = buf.readUInt32LE(at);
      const tokenIndex = buf.readUInt32LE(at + 4);
      const values = new Float32Array(d);
      for (let i = 0; i < d; i++) values[i] = buf.readFloatLE(at + 8 + 4 * i);
      records.push({ sentId, tokenIndex, values });
      count++;
    }
    perExample.set(id, records);
  });
  if (count !== total) {
    throw new Error(`header promises ${total} vectors, file holds ${count}`);
  }
  return { d, total, perExample };
}
