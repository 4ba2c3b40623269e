import type { ExportDocument, ExportLink, ExportNode } from '../src/schema';

/** Minimal valid node; fields overridable per test. */
export function makeNode(id: string, over: Partial<ExportNode> = {}): ExportNode {
  return {
    id,
    kind: 'original',
    user: `u_${id}`,
    followers: 0,
    timestamp: 1000,
    label: 1,
    probability: 0.9,
    community: 0,
    out_degree: 0,
    size_out_degree: 1.0,
    size_followers: 1.0,
    unobserved: false,
    ...over,
  };
}

/** Minimal valid document around the given nodes and links. */
export function makeDoc(nodes: ExportNode[], links: ExportLink[] = []): ExportDocument {
  const originals = nodes.filter((n) => n.kind === 'original').length;
  return {
    schema_version: 1,
    summary: {
      node_count: nodes.length,
      link_count: links.length,
      distinct_users: new Set(nodes.map((n) => n.user)).size,
      first_timestamp: nodes.length ? Math.min(...nodes.map((n) => n.timestamp)) : null,
      last_timestamp: nodes.length ? Math.max(...nodes.map((n) => n.timestamp)) : null,
      original_count: originals,
      retweet_count: nodes.length - originals,
      unobserved_originals: nodes.filter((n) => n.unobserved).length,
      rejected_clock_skew: 0,
    },
    nodes,
    links,
    hashtag_nodes: [],
    hashtag_links: [],
    trend: {
      bucket_seconds: 60,
      threshold: 1000,
      start: nodes.length ? Math.min(...nodes.map((n) => n.timestamp)) : null,
      fake: [],
      real: [],
      cumulative_fake: [],
      cumulative_real: [],
      viral_at: null,
    },
    meta: {},
  };
}
