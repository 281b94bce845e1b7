import { expect, it, vi } from "vitest";

// module state caches the resolved command, so each scenario needs a fresh
// import of the module under a different environment

it("honors a DECOMPOUND_CLI override", async () => {
  vi.resetModules();
  process.env.DECOMPOUND_CLI = "python3 -m decompound";
  try {
    const mod = await import("../src/index.js");
    expect(mod.version()).toBe("0.1.0");
  } finally {
    delete process.env.DECOMPOUND_CLI;
  }
});

it("fails with a pointer at the fix when the core is missing", async () => {
  vi.resetModules();
  process.env.DECOMPOUND_CLI = "no-such-decompound-binary";
  try {
    const mod = await import("../src/index.js");
    expect(() => mod.version()).toThrow(/DECOMPOUND_CLI/);
  } finally {
    delete process.env.DECOMPOUND_CLI;
  }
});
