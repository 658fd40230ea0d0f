import * as fs from "node:fs";
import * as net from "node:net";
import * as os from "node:os";
import * as path from "node:path";

import { PNG } from "pngjs";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { createSegmenterServer, rectangleRle } from "../src/server";

let server: net.Server;
let port: number;
let imagePath: string;

function request(payload: unknown): Promise<Record<string, unknown>> {
  return new Promise((resolve, reject) => {
    const socket = net.createConnection(port, "127.0.0.1");
    let buffer = "";
    socket.on("connect", () => {
      const line = typeof payload === "string" ? payload : JSON.stringify(payload);
      socket.write(line + "\n");
    });
    socket.on("data", (chunk) => {
      buffer += chunk.toString("utf-8");
      const idx = buffer.indexOf("\n");
      if (idx >= 0) {
        socket.end();
        try {
          resolve(JSON.parse(buffer.slice(0, idx)));
        } catch (err) {
          reject(err);
        }
      }
    });
    socket.on("error", reject);
  });
}

beforeAll(async () => {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "server-"));
  imagePath = path.join(dir, "image.png");
  const png = new PNG({ width: 12, height: 9, colorType: 0 });
  png.data.fill(128);
  fs.writeFileSync(imagePath, PNG.sync.write(png));

  server = createSegmenterServer("echo");
  await new Promise<void>((resolve) => server.listen(0, "127.0.0.1", resolve));
  port = (server.address() as net.AddressInfo).port;
});

afterAll(() => server.close());

describe("segmenter protocol server", () => {
  it("echo variant returns the filled box rectangle at confidence 1", async () => {
    const response = await request({
      request_id: "r1",
      image_path: imagePath,
      variant: "echo",
      boxes: [{ x_min: 2, y_min: 2, x_max: 4, y_max: 4 }],
    });
    expect(response.request_id).toBe("r1");
    const results = response.results as any[];
    expect(results).toHaveLength(1);
    expect(results[0].box_index).toBe(0);
    expect(results[0].masks).toHaveLength(1);
    expect(results[0].masks[0].confidence).toBe(1.0);
    const rle = results[0].masks[0].rle;
    expect(rle.width).toBe(12);
    expect(rle.height).toBe(9);
    // rows 2..4, columns 2..4 of a 12-wide image
    expect(rle.runs).toEqual([2 * 12 + 2, 3, 3 * 12 + 2, 3, 4 * 12 + 2, 3]);
  });

  it("answers malformed lines with an error and stays alive", async () => {
    const bad = await request("this is not json");
    expect(bad.error).toBeTruthy();
    expect(bad.request_id).toBeNull();

    const badFields = await request({ request_id: "r2", boxes: "nope" });
    expect(badFields.request_id).toBe("r2");
    expect(String(badFields.error)).toMatch(/image_path/);

    const ok = await request({
      request_id: "r3",
      image_path: imagePath,
      variant: "echo",
      boxes: [],
    });
    expect(ok.request_id).toBe("r3");
  });

  it("rejects variants it cannot serve", async () => {
    const response = await request({
      request_id: "r4",
      image_path: imagePath,
      variant: "sam-huge",
      boxes: [],
    });
    expect(String(response.error)).toMatch(/variant/);
  });

  it("handles 100 concurrent requests with matched ids", async () => {
    const calls = Array.from({ length: 100 }, (_, i) =>
      request({
        request_id: `bulk-${i}`,
        image_path: imagePath,
        variant: "echo",
        boxes: [{ x_min: i % 10, y_min: 0, x_max: (i % 10) + 1, y_max: 2 }],
      }).then((resp) => {
        expect(resp.request_id).toBe(`bulk-${i}`);
        expect((resp.results as any[])[0].masks[0].rle.runs[0]).toBe(i % 10);
        return resp;
      }),
    );
    const responses = await Promise.all(calls);
    expect(new Set(responses.map((r) => r.request_id)).size).toBe(100);
  });

  it("clamps boxes to the image and drops empty ones", () => {
    const rle = rectangleRle({ x_min: -5, y_min: -5, x_max: 1, y_max: 0 }, 4, 4);
    expect(rle.runs).toEqual([0, 2]);
    const empty = rectangleRle({ x_min: 10, y_min: 10, x_max: 12, y_max: 12 }, 4, 4);
    expect(empty.runs).toEqual([]);
  });
});
